#include <iostream>
#include <string>
#include <vector>

#include "strap/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return strap::run_cli(args, std::cout, std::cerr);
}
