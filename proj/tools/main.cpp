#include <cstdio>

int main() { std::puts("dyad 0.1.0"); return 0; }
