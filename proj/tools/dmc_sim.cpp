#include "cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return dmc::cli::main(argc, argv, std::cout, std::cerr);
}
