#include <iostream>

#include "hgec/cli.hpp"

int main(int argc, char** argv) { return hgec::cli::run(argc, argv, std::cout, std::cerr); }
