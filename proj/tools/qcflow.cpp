#include <iostream>

#include "qcflow/cli.hpp"

int main(int argc, char** argv) { return qcflow::cli::run_cli(argc, argv, std::cout, std::cerr); }
