#include <iostream>

#include "cli.hpp"
#include "demine/allocator.hpp"

int main(int argc, char** argv) {
    demine::retain_freed_memory();
    return demine::cli_main(argc, argv, std::cout, std::cerr);
}
