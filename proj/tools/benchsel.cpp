#include <iostream>

#include "benchsel/cli.hpp"

int main(int argc, char** argv) { return benchsel::cli::run_cli(argc, argv, std::cout, std::cerr); }
