#include <iostream>
#include <string>
#include <vector>

#include "fcaloha/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return fcaloha::run_cli(args, std::cout, std::cerr);
}
