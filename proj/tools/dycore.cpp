#include <iostream>

#include "dycore/cli/driver.hpp"

int main(int argc, char** argv) { return dycore::cli::run_cli(argc, argv, std::cout, std::cerr); }
