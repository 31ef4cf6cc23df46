#include <iostream>

#include "dbgorilla/cli.hpp"

int main(int argc, char** argv) {
    return dbgorilla::cli::run_cli({argv + 1, argv + argc}, std::cout, std::cerr);
}
