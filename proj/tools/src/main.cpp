#include <iostream>

#include "fbv/cli/experiment.hpp"

int main(int argc, char** argv) { return fbv::cli::run_cli(argc, argv, std::cout, std::cerr); }
