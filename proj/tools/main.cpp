#include <iostream>
#include <string>
#include <vector>

#include "gepde/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return gepde::cli::main(args, std::cout, std::cerr);
}
