#include <iostream>
#include <string>
#include <vector>

#include "adle/config.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return adle::run_cli(args, std::cout, std::cerr);
}
