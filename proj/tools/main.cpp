#include <string>
#include <vector>

#include "tvzip/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return tvzip::cli::run_cli(args);
}
