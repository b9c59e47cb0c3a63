#include <iostream>

#include "photocount/cli.hpp"

int main(int argc, char** argv) { return photocount::cli::run(argc, argv, std::cout, std::cerr); }
