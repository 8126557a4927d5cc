#include <cstdio>

int main() {
  std::puts("liekit_cli: not wired up yet");
  return 0;
}
