#include <iostream>

#include "forager/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return forager::cli_main(args, std::cout, std::cerr);
}
