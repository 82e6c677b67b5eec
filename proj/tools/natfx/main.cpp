#include <iostream>
#include <string>
#include <vector>

#include "natfx/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return natfx::cli::run_main(args, std::cout, std::cerr);
}
