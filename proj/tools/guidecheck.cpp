#include <iostream>

#include "guidecheck/cli.hpp"

int main(int argc, char** argv) { return guidecheck::cli::run(argc, argv, std::cout, std::cerr); }
