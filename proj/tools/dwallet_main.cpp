#include <iostream>
#include <string>
#include <vector>

#include "dwallet/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dwallet::cli::run_command(args, std::cout, std::cerr, dwallet::cli::process_env);
}
