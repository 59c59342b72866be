#include <iostream>

#include "branchpde/cli.hpp"

int main(int argc, char** argv) { return branchpde::cli::run_command(argc, argv, std::cout, std::cerr); }
