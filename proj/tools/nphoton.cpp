#include <iostream>

#include "nphoton/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return nphoton::run_cli(args, std::cout, std::cerr);
}
