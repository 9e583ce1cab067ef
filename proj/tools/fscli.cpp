#include <cstdio>

#include "freespace/geom.hpp"

int main() {
  std::puts("fscli: no subcommands wired yet");
  return 2;
}
