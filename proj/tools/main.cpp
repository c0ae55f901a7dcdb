#include <iostream>

#include "commands.hpp"

int main(int argc, char** argv) {
  return preimage::cli::run_cli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
