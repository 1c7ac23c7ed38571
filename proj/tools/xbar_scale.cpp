#include <iostream>

#include "xbarscale/cli.hpp"

int main(int argc, char** argv) { return xbarscale::run_cli(argc, argv, std::cout, std::cerr); }
