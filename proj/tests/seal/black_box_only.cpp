// Control: the same sealed build succeeds through the public boundary.
#include "sib/gamin/gamin.hpp"
#include "sib/metrics/metrics.hpp"
#include "sib/oracle/black_box.hpp"

std::size_t probe(sib::oracle::BlackBox& box) { return box.input_dim() + box.num_classes(); }
