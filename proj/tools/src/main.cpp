#include <iostream>

#include "confbandit_cli/app.hpp"

int main(int argc, char** argv) { return confbandit::cli::run_cli(argc, argv, std::cout, std::cerr); }
