#include <iostream>
#include <string>
#include <vector>

#include "capfield/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv, argv + argc);
  return capfield::cli::run(args, std::cout, std::cerr);
}
