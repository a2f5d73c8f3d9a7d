#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pinkforge/mat2.hpp"

namespace pinkforge {

// Hard ceiling on enumerated elements unless the caller raises it.
inline constexpr std::size_t kDefaultGroupCap = std::size_t(1) << 24;

// Fully enumerated subgroup of SL2(Z/l^m)^n.  Elements are packed as 4n
// uint32 residues each and kept sorted lexicographically, so membership is a
// binary search and two groups are equal iff their arenas are equal.
// Requires l^m < 2^31 so that raw products fit in uint64.
class FiniteGroup {
public:
    // BFS closure under right multiplication by each generator and its
    // inverse.  All generators must share (l, m, n) and have det 1 per part.
    static FiniteGroup closure(const std::vector<GroupElement>& generators,
                               std::size_t cap = kDefaultGroupCap);

    // Smallest subgroup containing `seeds` that is stable under conjugation
    // by every element of <conjugators>.  Only the result is enumerated; the
    // conjugators act from outside and need not lie in it.
    static FiniteGroup normal_closure(const std::vector<GroupElement>& seeds,
                                      const std::vector<GroupElement>& conjugators,
                                      std::size_t cap = kDefaultGroupCap);

    // Wrap an explicit element list.  Derives a lex-least generating set and
    // verifies the list really is a subgroup (throws PreconditionError).
    static FiniteGroup from_elements(const std::vector<GroupElement>& elements,
                                     std::size_t cap = kDefaultGroupCap);

    static FiniteGroup trivial(uint64_t ell, unsigned prec, unsigned n);

    uint64_t ell() const { return ell_; }
    unsigned precision() const { return prec_; }
    unsigned factors() const { return n_; }
    uint64_t modulus() const { return mod_; }
    std::size_t order() const { return count_; }
    const std::vector<GroupElement>& generators() const { return gens_; }

    GroupElement element(std::size_t idx) const;
    bool contains(const GroupElement& g) const;
    bool contains_all(const FiniteGroup& other) const;
    bool operator==(const FiniteGroup& o) const;
    bool operator!=(const FiniteGroup& o) const { return !(*this == o); }

    // Packed sorted residues, 4n words per element; stable dedup key.
    const std::vector<uint32_t>& packed() const { return arena_; }

private:
    FiniteGroup() = default;

    uint64_t ell_ = 0;
    unsigned prec_ = 0;
    unsigned n_ = 0;
    uint64_t mod_ = 0;
    std::size_t count_ = 0;
    std::vector<GroupElement> gens_;
    std::vector<uint32_t> arena_;

    friend class GroupBuilder;
};

// |SL2(Z/l^m)| = l^(3m-2) (l^2 - 1).
uint64_t full_sl2_order(uint64_t ell, unsigned m);

// |G| / |H| with an exact-divisibility check.
std::size_t group_index(const FiniteGroup& G, const FiniteGroup& H);

// Tuple with gen_<kind>(a) in one slot and Id elsewhere.  kind in {L,R,D}.
GroupElement gen_tuple(char kind, unsigned slot, unsigned n, const PadicScalar& a);

// Generators of the product ball B(levels) at precision m: the three
// standard generators at l^s per slot (L(1), R(1) when s = 0).  Level 0
// needs l >= 5; level 1 needs l >= 3.
std::vector<GroupElement> ball_generators(uint64_t ell, unsigned m,
                                          const std::vector<unsigned>& levels);

// Subgroup generated by commutators [a, b], a in A, b in B, for A and B
// given by generating sets that normalize each other's span (balls do).
FiniteGroup comm_subgroup(const std::vector<GroupElement>& gens_a,
                          const std::vector<GroupElement>& gens_b,
                          std::size_t cap = kDefaultGroupCap);

FiniteGroup derived_subgroup(const FiniteGroup& G, std::size_t cap = kDefaultGroupCap);

// Elementwise residues mod l^k at precision k.
GroupElement reduced_element(const GroupElement& g, unsigned k);

// Elementwise residues mod l^k, deduplicated, at precision k.
FiniteGroup reduction_image(const FiniteGroup& G, unsigned k);
// {g in G : g = Id mod l^k} at the original precision.
FiniteGroup reduction_kernel(const FiniteGroup& G, unsigned k);
// Image under the projection onto the chosen slots.
FiniteGroup project(const FiniteGroup& G, const std::vector<unsigned>& slots);
// Elements satisfying pred; throws PreconditionError if not a subgroup.
FiniteGroup subgroup_where(const FiniteGroup& G,
                           const std::function<bool(const GroupElement&)>& pred);

// G >= B(levels)?  Decided by membership of the 3n ball generators for
// s >= 1 (s >= 2 when l = 2); s = 0 uses mod-l surjectivity and needs l >= 5.
bool contains_ball(const FiniteGroup& G, const std::vector<unsigned>& levels);

// n = 2 only: an element trivial mod l^t in one slot but not the other, if
// any exists (first in canonical order).  nullopt certifies that G mod l^t
// is the graph of an isomorphism between its two projections.
std::optional<GroupElement> graph_defect(const FiniteGroup& G, unsigned t);

// Largest normal subgroup whose mod-l image is an l-group: per-factor
// analysis of the mod-l image, then preimage.  Defined with the classifier.
FiniteGroup max_normal_proell(const FiniteGroup& G);

// Membership interface for groups too large to enumerate.  pair_contains_ball
// answers whether the projection to slots (i, j) contains B(s, s).
struct GroupOracle {
    virtual ~GroupOracle() = default;
    virtual uint64_t ell() const = 0;
    virtual unsigned precision() const = 0;
    virtual unsigned factors() const = 0;
    virtual bool contains(const GroupElement& g) const = 0;
    virtual bool pair_contains_ball(unsigned i, unsigned j, unsigned s) const = 0;
    virtual std::string describe() const = 0;
};

class EnumeratedOracle final : public GroupOracle {
public:
    explicit EnumeratedOracle(const FiniteGroup& G) : G_(G) {}
    uint64_t ell() const override { return G_.ell(); }
    unsigned precision() const override { return G_.precision(); }
    unsigned factors() const override { return G_.factors(); }
    bool contains(const GroupElement& g) const override { return G_.contains(g); }
    bool pair_contains_ball(unsigned i, unsigned j, unsigned s) const override;
    std::string describe() const override;
    const FiniteGroup& group() const { return G_; }

private:
    const FiniteGroup& G_;
};

// Product of per-slot balls B(level_i) (level 0 = all of SL2).
class BallProductOracle final : public GroupOracle {
public:
    BallProductOracle(uint64_t ell, unsigned prec, std::vector<unsigned> levels);
    uint64_t ell() const override { return ell_; }
    unsigned precision() const override { return prec_; }
    unsigned factors() const override { return static_cast<unsigned>(levels_.size()); }
    bool contains(const GroupElement& g) const override;
    bool pair_contains_ball(unsigned i, unsigned j, unsigned s) const override;
    std::string describe() const override;

private:
    uint64_t ell_;
    unsigned prec_;
    std::vector<unsigned> levels_;
};

struct GoursatReport {
    uint64_t ell = 0;
    unsigned precision = 0;
    unsigned factors = 0;
    std::vector<std::vector<unsigned>> pair_levels;
    std::vector<unsigned> conclusion;
    std::vector<std::string> log;
    bool verified = false;
    std::string str() const;
};

// From pairwise ball containment at levels s[i][j] to containment of the
// product ball with level sum_{j != i} s[i][j] + (n-2)v per slot, certified
// by explicit iterated-commutator witnesses the oracle confirms one by one.
// Throws HypothesisUnmet if a pairwise hypothesis fails, LemmaViolation if a
// witness is rejected.
GoursatReport goursat_combine(const GroupOracle& G,
                              const std::vector<std::vector<unsigned>>& s);
GoursatReport goursat_combine(const FiniteGroup& G,
                              const std::vector<std::vector<unsigned>>& s);

} // namespace pinkforge
