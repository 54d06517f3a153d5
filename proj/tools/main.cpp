#include <iostream>
#include <string>
#include <vector>

#include "logprox/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return logprox::cli::run(args, std::cout, std::cerr);
}
