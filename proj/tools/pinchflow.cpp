#include <iostream>

#include "pinchflow/cli.hpp"

int main(int argc, char** argv) {
  return pinchflow::cli::run_main(argc, argv, std::cout, std::cerr);
}
