#include <iostream>
#include <string>
#include <vector>

#include "cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    const auto report = ncsrobust::cli::run(args);
    (report.exit_code >= ncsrobust::cli::exit_code::usage ? std::cerr : std::cout) << report.text;
    return report.exit_code;
}
