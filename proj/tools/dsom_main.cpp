#include <iostream>

#include "dsom/cli.hpp"

int main(int argc, char** argv) {
    return dsom::run_cli(argc, argv, std::cout, std::cerr);
}
