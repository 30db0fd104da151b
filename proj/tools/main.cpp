#include <iostream>
#include <string>
#include <vector>

#include "geoseq/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return geoseq::run_cli(args, std::cout, std::cerr);
}
