#include <iostream>

#include "cli.hpp"

int main(int argc, char **argv) { return cnfred::cli::run(argc, argv, std::cout, std::cerr); }
