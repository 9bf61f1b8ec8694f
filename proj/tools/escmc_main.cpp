#include <string>
#include <vector>

#include "esc/io.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return esc::run_command(args);
}
