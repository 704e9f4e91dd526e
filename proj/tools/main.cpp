#include <iostream>

#include "fallcascade/cli/app.hpp"

int main(int argc, char** argv) { return fallcascade::cli::run_cli(argc, argv, std::cout, std::cerr); }
