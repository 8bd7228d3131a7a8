#include <iostream>
#include <string>
#include <vector>

#include "affcode/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return affcode::run_cli(args, std::cout, std::cerr);
}
