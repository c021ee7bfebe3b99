#include <cstdio>

int main() {
  std::puts("narrowgap cli placeholder");
  return 0;
}
