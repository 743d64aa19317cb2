#include <iostream>
#include <string>
#include <vector>

#include "prnet/cli.hpp"

int main(int argc, char** argv)
{
    return prnet::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
