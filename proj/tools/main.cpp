#include <iostream>

#include "trcv/cli.hpp"

int main(int argc, char** argv) {
  return trcv::cli::main_entry(argc, argv, std::cout, std::cerr);
}
