#include <iostream>

#include "minres/cli.hpp"

int main(int argc, char** argv) { return minres::cli::run(argc, argv, std::cout, std::cerr); }
