#include <iostream>

#include "locodl/cli/commands.hpp"

int main(int argc, char** argv) { return locodl::cli::run_cli(argc, argv, std::cout, std::cerr); }
