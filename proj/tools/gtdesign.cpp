#include <iostream>
#include <string>
#include <vector>

#include "gtdesign/cli.hpp"

int main(int argc, char** argv) {
  return gtdesign::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
