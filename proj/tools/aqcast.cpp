#include <iostream>
#include <string>
#include <vector>

#include "aqcast/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return aqcast::run_cli(args, std::cout, std::cerr);
}
