#include <iostream>
#include <string>
#include <vector>

#include "lecam/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return lecam::cli::run(args, std::cout, std::cerr, std::cin, lecam::default_workers());
}
