#include <cstdlib>
#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::optional<std::string> out_dir;
  if (const char* env = std::getenv(innodiff::cli::kOutDirEnv); env && *env) out_dir = env;
  return innodiff::cli::run(args, std::cout, std::cerr, out_dir);
}
