#include <iostream>
#include <string>
#include <vector>

#include "lumiscore/cli.h"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return lumiscore::run_cli(args, std::cout, std::cerr);
}
