#include "shellflow/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return shellflow::run_cli(argc, argv, std::cout, std::cerr);
}
