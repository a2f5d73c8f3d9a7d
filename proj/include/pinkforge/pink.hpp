#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pinkforge/group.hpp"
#include "pinkforge/modlattice.hpp"

namespace pinkforge {

enum class Verdict {
    Verified,
    InconclusiveAtPrecision,
    LemmaViolation,
};

const char* verdict_name(Verdict v);

// Span of the trace-zero projections Theta(g) over all elements of G, three
// coordinates (x, h, y) per factor.  The lattice lives at precision m, or
// m - 1 when l = 2 (Theta loses one digit there); l = 2 additionally requires
// G to be trivial mod 4.
ModLattice lie_algebra(const FiniteGroup& G);

// Least k < precision with l^k sl2^n inside L, if any.  The valid k form an
// upward-closed set, so the least one carries all the information.
std::optional<unsigned> least_scaled_basis_level(const ModLattice& L);

// Module of per-factor traces tr(u_i w_i) over all pairs of basis rows of L,
// whose dimension must be 3n; the result has dimension n.
ModLattice trace_form_module(const ModLattice& L);

// Outcome of one theorem-verification run.  conclusion_checked holds the
// per-factor ball levels actually confirmed inside the relevant derived
// subgroup; subgroup_indices the indices realized along the reduction chain.
struct PinkReport {
    explicit PinkReport(ModLattice lie) : lie_algebra(std::move(lie)) {}

    std::string input;
    ModLattice lie_algebra;
    std::optional<unsigned> k_found;
    std::vector<unsigned> conclusion_checked;
    std::vector<std::size_t> subgroup_indices;
    Verdict verdict = Verdict::InconclusiveAtPrecision;
    std::string detail;

    std::string str() const;
};

// Pro-l core theorem: if l^k sl2^n lies in L(G) for a pro-l group G (trivial
// mod-l image, odd l) with 2k < m, then G' must contain B(2k, ..., 2k).
// Verdicts: Verified when the membership checks pass, InconclusiveAtPrecision
// when 2k >= m, LemmaViolation (with certificate) if a guaranteed membership
// fails.  Throws HypothesisUnmet when L(G) does not contain l^k sl2^n.
PinkReport pink_proell_check(const FiniteGroup& G, unsigned k);

// Approximate-eigenvalue certificate: given g w = lambda w mod l^nlevel with
// w nonzero mod l^{alpha+1} and alpha < nlevel <= m, the characteristic
// polynomial of g must vanish at lambda to order >= nlevel - alpha.  Returns
// that comparison; throws PreconditionError when the inputs fail the stated
// congruences.  d x d with d <= 6.
bool approx_eigen_check(const std::vector<std::vector<PadicScalar>>& g,
                        const PadicScalar& lambda,
                        const std::vector<PadicScalar>& w,
                        unsigned nlevel, unsigned alpha);

// Preimage in G of one l-Sylow of the mod-l image: deterministically the
// Sylow grown from the first l-element in canonical order.  [G:T] always
// divides ((l^2 - 1))^n = (|SL2(F_l)| / l)^n; violating that is reported as
// LemmaViolation.
FiniteGroup sylow_preimage_T(const FiniteGroup& G);

// Trichotomy for n = 2, l > 5.  Exactly one case is reported:
//   1: an element (a, b) with one side scalar mod l and the other of
//      prime-to-l order >= 3 exists; G' then contains B(s, s) for
//      s = 20 max(n1, n2), checked when that sits below the precision.
//   2: a pro-l subgroup T with [G:T] dividing 48^2.
//   3: a subgroup T with [G:T] dividing 4 * 48 whose mod-l image is the
//      graph of an isomorphism between the N-quotients of its projections,
//      with projection types Cartan/Borel/full, N-quotient orders not
//      dividing 8, per-factor balls B(n1), B(n2), and matching signs on
//      scalar pairs.
// Cases 2 and 3 are fully verified at the mod-l level before returning;
// any failed construction step throws ConstructionFailed.
struct FirstReductionReport {
    unsigned case_found = 0;
    Verdict verdict = Verdict::InconclusiveAtPrecision;
    std::optional<GroupElement> easy_witness;
    unsigned checked_level = 0; // case 1: least verified ball level, 0 = none
    std::optional<FiniteGroup> T;
    std::size_t index = 1;
    std::vector<std::size_t> index_chain; // [G:H], [H:K], [K:T]
    std::string detail;

    std::string str() const;
};

FirstReductionReport first_reduction(const FiniteGroup& G, unsigned n1, unsigned n2);

// End-to-end run for the headline statement: reduce G to a pro-l core
// (Sylow preimage for l <= 5 or n != 2, the trichotomy for l > 5, n = 2),
// compute its Lie algebra and least k, confirm the pro-l conclusion, then
// recombine pairwise ball levels through the Goursat witnesses.  The claimed
// level p = 80 (max(n,2) - 1) k is only marked Verified when p < m and a
// containment at level <= p was actually checked; otherwise the report is
// InconclusiveAtPrecision with the best verified levels attached.
PinkReport main_theorem_harness(const FiniteGroup& G, unsigned k);

// The l = 2 asymmetry example: the group generated by B_2(p, p) and the
// diagonal copy of B_2(n1), at precision m, for 3 <= n1 < p < m.  Order is
// 2^{3(m - n1) + 3(m - p)}; CapExceeded when that overflows the default cap.
FiniteGroup example_graph_group(unsigned n1, unsigned p, unsigned m);

// Exact matrix identities behind the example's c/d asymmetry: with
// N = diag(2^{n1 + 1}, 1), conjugation by N sends R(2^{2 n1 + 1}) to
// R(2^{n1}) but L(2^{2 n1 + 1}) to L(2^{3 n1 + 2}).  Checked at precision m
// in the inverse-free form R(..) N = N R(..), L(..) N = N L(..).
bool graph_group_conjugation_identities(unsigned n1, unsigned m);

} // namespace pinkforge
