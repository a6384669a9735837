#include <iostream>

#include "gcsg/cli.hpp"

int main(int argc, char** argv) {
    return gcsg::cli::run(argc, argv, std::cout, std::cerr);
}
