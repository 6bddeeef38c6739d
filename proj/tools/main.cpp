#include "cxhyp/cxhyp.hpp"
int main() { return 0; }
