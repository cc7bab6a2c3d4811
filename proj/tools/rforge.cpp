// rforge: command-line front end. Subcommands are wired up in cli.hpp.

#include <cstdio>

int main() {
  std::puts("rforge: CLI not wired up yet");
  return 2;
}
