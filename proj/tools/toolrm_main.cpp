#include <string>
#include <vector>

#include "toolrm/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return toolrm::run(args);
}
