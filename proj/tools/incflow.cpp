#include <iostream>

#include "incflow/cli.hpp"

int main(int argc, char** argv) { return incflow::run_cli(argc, argv, std::cout, std::cerr); }
