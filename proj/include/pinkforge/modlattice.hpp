#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pinkforge/mat2.hpp"
#include "pinkforge/padic.hpp"

namespace pinkforge {

// Submodule of (Z/l^m)^dim, stored via its Howell basis: at most one pivot
// row per column, pivots of the form l^e, entries above a pivot reduced
// mod l^e.  The basis is canonical, so equality is row-by-row comparison.
class ModLattice {
public:
    static ModLattice span(uint64_t ell, unsigned prec, unsigned dim,
                           const std::vector<std::vector<uint64_t>>& gens);
    static ModLattice zero_lattice(uint64_t ell, unsigned prec, unsigned dim);
    // l^k * (whole space), spanned by scaled unit vectors.
    static ModLattice scaled_full(uint64_t ell, unsigned prec, unsigned dim, unsigned k);

    uint64_t ell() const { return ell_; }
    unsigned precision() const { return prec_; }
    uint64_t modulus() const { return mod_; }
    unsigned dim() const { return dim_; }

    const std::vector<std::vector<uint64_t>>& basis() const { return rows_; }
    bool is_zero() const { return rows_.empty(); }

    bool contains(const std::vector<uint64_t>& v) const;
    bool contains_lattice(const ModLattice& o) const;
    bool operator==(const ModLattice& o) const;
    bool operator!=(const ModLattice& o) const { return !(*this == o); }

    ModLattice sum(const ModLattice& o) const;
    // Image under a linear map given as a dim x dim matrix (column action:
    // w_i = sum_j op[i][j] v_j).
    ModLattice apply(const std::vector<std::vector<uint64_t>>& op) const;

    // Smallest valuation of any entry of any basis row (= precision if zero).
    unsigned min_valuation() const;
    // true iff the lattice contains l^k e_i for every coordinate i.
    bool contains_scaled_basis(unsigned k) const;

    std::string str() const;

private:
    ModLattice(uint64_t ell, unsigned prec, unsigned dim);

    uint64_t ell_ = 0;
    unsigned prec_ = 0;
    uint64_t mod_ = 0;
    unsigned dim_ = 0;
    std::vector<std::vector<uint64_t>> rows_;
    std::vector<std::pair<unsigned, unsigned>> pivots_; // (column, exponent)
};

// 3x3 matrix (row-major) of the map v -> coords(C^-1 mat(v) C) on trace-zero
// coordinates (x, h, y), mat(x, h, y) = [[h, x], [y, -h]].
std::vector<std::vector<uint64_t>> conj_operator(const Mat2& c);

// Close W under conjugation by L(l^s), R(l^s), D(l^s).  Preconditions:
// s >= 2 for l = 2, s >= 1 otherwise; t + 4s (+4 more when l = 2) < m;
// W must contain a vector that is nonzero mod l^{t+1}.  The closure always
// contains l^{t+4s+4v} times the full trace-zero module (v = 1 iff l = 2);
// if it does not, LemmaViolation reports the offending data.
ModLattice conj_saturate(const ModLattice& w, unsigned s, unsigned t);

} // namespace pinkforge
