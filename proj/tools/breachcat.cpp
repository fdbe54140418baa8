#include "breachcat/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return breachcat::run_cli(argc, argv, std::cout, std::cerr);
}
