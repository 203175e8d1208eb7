#include <iostream>

#include "g2s/cli.hpp"

int main(int argc, char** argv) { return g2s::run_cli(argc, argv, std::cout, std::cerr); }
