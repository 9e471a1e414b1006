#include <shsaw/cli.hpp>

#include <iostream>

int main(int argc, char** argv) { return shsaw::run_cli(argc, argv, std::cout, std::cerr); }
