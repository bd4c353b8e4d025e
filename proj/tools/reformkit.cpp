#include <iostream>

#include "reformkit/cli.hpp"

int main(int argc, char** argv) { return reformkit::run_cli(argc, argv, std::cout, std::cerr); }
