#include "wcpd/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return wcpd::cli::run(argc, argv, std::cout, std::cerr);
}
