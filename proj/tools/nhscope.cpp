#include <iostream>

#include "nhscope/cli.hpp"

int main(int argc, char** argv) { return nhscope::cli::main(argc, argv, std::cout, std::cerr); }
