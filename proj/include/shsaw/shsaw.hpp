#pragma once

#include <shsaw/netcore.hpp>
#include <shsaw/mbvd.hpp>
#include <shsaw/nelder_mead.hpp>
#include <shsaw/extraction.hpp>
#include <shsaw/ladder.hpp>
#include <shsaw/layout.hpp>
#include <shsaw/touchstone.hpp>
#include <shsaw/io.hpp>
#include <shsaw/documents.hpp>
#include <shsaw/workflow.hpp>
#include <shsaw/cli.hpp>
