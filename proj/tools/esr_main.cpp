#include <string>
#include <vector>

#include "esr/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return esr::run_cli(args);
}
