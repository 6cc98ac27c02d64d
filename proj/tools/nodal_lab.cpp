#include <iostream>

#include "nodal_lab/cli.hpp"

int main(int argc, char** argv) { return nodal::cli::run(argc, argv, std::cout, std::cerr); }
