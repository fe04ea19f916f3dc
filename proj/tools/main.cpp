#include <iostream>

#include "bipolymer/cli.hpp"

int main(int argc, char** argv) { return bipolymer::cli::run(argc, argv, std::cout, std::cerr); }
