#include <cstdio>
int main() { std::printf("nsinf: CLI not yet wired\n"); return 2; }
