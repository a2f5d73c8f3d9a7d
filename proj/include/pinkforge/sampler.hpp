#pragma once

#include <cstdint>

#include "pinkforge/groupfile.hpp"

namespace pinkforge {

// Random generators drawn from the depth-1 ball in every factor; the span
// is pro-l by construction.  Deterministic in seed.
GroupFile sample_proell(uint64_t ell, unsigned m, unsigned n,
                        unsigned gen_count, uint64_t seed);

// n = 2 samples spread over the reduction families: graphs of the full
// group, Cartan / normalizer / Borel preimages, the pro-l ball, and an
// easy-element extension, each twisted by random unimodular conjugators.
// Meant for l >= 7 at m = 2 scale.
GroupFile sample_pair(uint64_t ell, unsigned m, uint64_t seed);

} // namespace pinkforge
