#include <string>
#include <vector>

#include "scenediff/cli.hpp"

int main(int argc, char** argv) {
  return scenediff::cli::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
