#include <iostream>

#include "comire/cli.hpp"

int main(int argc, char** argv) { return comire::run_cli(argc, argv, std::cout, std::cerr); }
