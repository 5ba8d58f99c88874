#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) {
  return a3dmm::cli::run(argc, argv, std::cout, std::cerr);
}
