// Must not compile: attack-side code constructing its own oracle.
#include "sib/oracle/oracle.hpp"

int probe() { return 0; }
