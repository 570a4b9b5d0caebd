#include "kdvlab/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return kdvlab::cli_main(argc, argv, std::cout, std::cerr); }
