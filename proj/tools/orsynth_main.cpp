#include <iostream>

#include "orsynth/cli.hpp"

int main(int argc, char** argv) { return orsynth::run_cli(argc, argv, std::cout, std::cerr); }
