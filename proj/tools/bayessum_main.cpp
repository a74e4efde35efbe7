#include <iostream>
#include <string>
#include <vector>

#include "bayessum/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return bayessum::run_cli(args, std::cout, std::cerr);
}
