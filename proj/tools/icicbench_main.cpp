#include <string>
#include <vector>

#include "icic/cli.hpp"

int main(int argc, char** argv) {
  return icic::cli_main(std::vector<std::string>(argv + 1, argv + argc));
}
