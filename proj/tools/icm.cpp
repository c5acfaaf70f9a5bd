#include <iostream>

#include "icm/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  const auto out = icm::run_command(args);
  std::cout << out.payload;
  std::cerr << out.diagnostics;
  return out.exit_code;
}
