#include <iostream>

#include "dpl/cli.hpp"

int main(int argc, char** argv) {
  return dpl::cli_main(argc, argv, std::cout, std::cerr);
}
