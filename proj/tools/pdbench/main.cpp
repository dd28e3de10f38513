#include <iostream>

#include "pdbench/cli.hpp"

int main(int argc, char** argv) { return pdbench::cli_main(argc, argv, std::cout, std::cerr); }
