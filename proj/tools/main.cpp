#include <iostream>

#include "zpr/cli.hpp"

int main(int argc, char** argv) { return zpr::run_cli(argc, argv, std::cout, std::cerr); }
