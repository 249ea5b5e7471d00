#include <string>
#include <vector>

#include "etpa/cli.hpp"

int main(int argc, char** argv) {
  return etpa::cli::run_command(std::vector<std::string>(argv + 1, argv + argc));
}
