#include "kexpfam.hpp"
int main() { return 0; }
