#include <iostream>

#include "mobfl/commands.hpp"

int main(int argc, char** argv) {
  return mobfl::commands::run(argc, argv, std::cout, std::cerr);
}
