#include <iostream>

#include "fleetgame/cli.hpp"

int main(int argc, char** argv) { return fleetgame::cli::run(argc, argv, std::cout, std::cerr); }
