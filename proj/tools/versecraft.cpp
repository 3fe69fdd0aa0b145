#include <iostream>

#include "versecraft/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return versecraft::run_cli(args, std::cout, std::cerr);
}
