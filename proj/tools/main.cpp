#include <iostream>
#include <string>
#include <vector>

#include "shfl/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return shfl::run_cli(args, std::cout, std::cerr);
}
