#include "cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return landsel::cli::run(argc, argv, std::cout, std::cerr); }
