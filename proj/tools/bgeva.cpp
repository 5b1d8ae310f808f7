#include <iostream>
#include <string>
#include <vector>

#include "bgeva/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return bgeva::run_cli(args, std::cout, std::cerr);
}
