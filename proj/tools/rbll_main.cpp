#include <iostream>
#include <string>
#include <vector>

#include "rbll/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return rbll::cli::run(args, std::cout);
}
