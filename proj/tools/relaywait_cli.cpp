#include <iostream>

#include "relaywait/cli.hpp"

int main(int argc, char** argv)
{
    return relaywait::cli::main(argc, argv, std::cout, std::cerr);
}
