#include <string>
#include <vector>

#include "coopstab/cli.hpp"

int main(int argc, char** argv) {
  return coopstab::run_cli(std::vector<std::string>(argv, argv + argc));
}
