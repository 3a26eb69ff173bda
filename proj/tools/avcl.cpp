#include <iostream>

#include "avcl/cli.hpp"

int main(int argc, char** argv) {
  return avcl::cli::run(argc, argv, std::cout, std::cerr);
}
