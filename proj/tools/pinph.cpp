#include <iostream>

#include "pinph/cli.hpp"

int main(int argc, char** argv) { return pinph::cli::run(argc, argv, std::cerr); }
