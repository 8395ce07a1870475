#include <iostream>

#include "tcbind/cli.hpp"

int main(int argc, char** argv) { return tcbind::cli::run(argc, argv, std::cout, std::cerr); }
