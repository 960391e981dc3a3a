#include <iostream>

#include "aif/cli.hpp"

int main(int argc, char** argv) { return aif::cli_main(argc, argv, std::cout, std::cerr); }
