#include "gmhf/cli.h"

#include <iostream>

int main(int argc, char **argv) {
  return gmhf::run_command(argc, argv, std::cout, std::cerr);
}
