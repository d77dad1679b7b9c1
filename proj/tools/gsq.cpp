#include <iostream>

#include "gsq/cli.hpp"

int main(int argc, char** argv) { return gsq::run_cli(argc, argv, std::cout, std::cerr); }
