#include <iostream>

#include "ymr/cli.hpp"

int main(int argc, char** argv)
{
    return ymr::cli_main(argc, argv, std::cout, std::cerr);
}
