#include <iostream>

#include "mhd/cli.hpp"

int main(int argc, char** argv) { return mhd::run_cli(argc, argv, std::cout, std::cerr); }
