#include <iostream>
#include <string>
#include <vector>

#include "clir/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return clir::cli_dispatch(args, std::cout, std::cerr);
}
