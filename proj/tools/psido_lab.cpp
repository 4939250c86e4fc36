#include <iostream>

#include "psido/cli.hpp"

int main(int argc, char** argv) { return psido::cli::run(argc, argv, std::cout, std::cerr); }
