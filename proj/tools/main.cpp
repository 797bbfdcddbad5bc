#include <iostream>

#include "mesonbell/cli.hpp"

int main(int argc, char** argv) { return mesonbell::cli::run(argc, argv, std::cout, std::cerr); }
