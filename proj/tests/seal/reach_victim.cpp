// Must not compile: attack-side code reaching for the target's internals.
#include "sib/victim/victim.hpp"

std::size_t peek(const sib::victim::VictimModel& m) { return m.ann().layers().size(); }
