// dcl_main.cpp -- command-line entry point
#include <vector>

#include "dcl/cli.hpp"

int main(int argc, char** argv) {
    return dcl::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
