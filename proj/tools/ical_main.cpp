#include <iostream>

#include "ical/cli.hpp"

int main(int argc, char** argv) { return ical::run_cli(argc, argv, std::cout, std::cerr); }
