#include <iostream>
#include <string>
#include <vector>

#include "donet/app/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return donet::app::run_cli(args, std::cout, std::cerr);
}
