#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) { return ballsbins::cli::run(argc, argv, std::cout, std::cerr); }
