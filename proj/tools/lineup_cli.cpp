#include <iostream>
#include <string>
#include <vector>

#include "lineup/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return lineup::cli::run(args, std::cout, std::cerr);
}
