#include <iostream>

#include "ssdsim/cli.hpp"

int main(int argc, char **argv) {
  return ssdsim::run_cli(argc, argv, std::cout, std::cerr);
}
