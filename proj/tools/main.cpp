#include <iostream>

#include "sybilnet/cli.hpp"

int main(int argc, char** argv) {
  return sybilnet::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
