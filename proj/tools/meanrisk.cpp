#include <iostream>

#include "meanrisk/cli.hpp"

int main(int argc, char** argv) { return meanrisk::cli::run(argc, argv, std::cout, std::cerr); }
