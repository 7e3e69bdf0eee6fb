#include <iostream>
#include <string>
#include <vector>

#include "commands.h"

int main(int argc, char** argv) {
  return crossfuse::cli::Main(std::vector<std::string>(argv, argv + argc),
                              std::cout, std::cerr);
}
