// placeholder: acceptance suite filled in below
#include <cstdio>
int main() {
  std::printf("acceptance suite not yet implemented\n");
  return 1;
}
