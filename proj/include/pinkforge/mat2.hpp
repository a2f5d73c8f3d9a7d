#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "pinkforge/padic.hpp"

namespace pinkforge {

// 2x2 matrix over Z/l^m.  Entries all carry the same (l, m).
class Mat2 {
public:
    Mat2(const PadicScalar& a, const PadicScalar& b,
         const PadicScalar& c, const PadicScalar& d);

    static Mat2 identity(uint64_t ell, unsigned prec);
    static Mat2 zero(uint64_t ell, unsigned prec);
    static Mat2 from_residues(uint64_t ell, unsigned prec,
                              const std::array<uint64_t, 4>& abcd);

    uint64_t ell() const { return e_[0].ell(); }
    unsigned precision() const { return e_[0].precision(); }
    // Row-major: at(0) = a, at(1) = b, at(2) = c, at(3) = d.
    const PadicScalar& at(unsigned i) const { return e_[i]; }

    Mat2 operator*(const Mat2& o) const;
    Mat2 operator+(const Mat2& o) const;
    Mat2 operator-(const Mat2& o) const;
    Mat2 scaled(const PadicScalar& s) const;

    PadicScalar det() const;
    PadicScalar trace() const;
    bool is_invertible() const { return det().is_unit(); }
    Mat2 inverse() const;

    bool operator==(const Mat2& o) const;
    bool operator!=(const Mat2& o) const { return !(*this == o); }

    // true iff this == identity mod l^k (k <= precision)
    bool congruent_identity(unsigned k) const;
    // min valuation over entries of (this - identity)
    unsigned depth_from_identity() const;

    std::array<uint64_t, 4> residues() const;
    std::string str() const;

private:
    std::array<PadicScalar, 4> e_;
};

// Standard generators.
Mat2 gen_L(uint64_t ell, unsigned prec, int64_t a);          // [[1,0],[a,1]]
Mat2 gen_R(uint64_t ell, unsigned prec, int64_t a);          // [[1,a],[0,1]]
Mat2 gen_D(uint64_t ell, unsigned prec, int64_t a);          // diag(1+a, (1+a)^-1)
Mat2 gen_L(const PadicScalar& a);
Mat2 gen_R(const PadicScalar& a);
Mat2 gen_D(const PadicScalar& a);

Mat2 comm(const Mat2& x, const Mat2& y);                     // x y x^-1 y^-1
Mat2 mat_pow(const Mat2& g, int64_t e);
Mat2 conj(const Mat2& c, const Mat2& x);                     // c x c^-1

// Trace-zero projection in coordinates (x, h, y): g - (tr g / 2) Id has the
// shape [[h, x], [y, -h]].  For l = 2 the input must be identity mod 4 and
// the result lives one digit lower (dividing the even trace by 2).
std::array<PadicScalar, 3> theta_coords(const Mat2& g);

// Series log of g = Id + T, T = 0 mod l (mod 4 when l = 2); exact mod l^m.
Mat2 mat_log(const Mat2& g);
// Series exp of X = 0 mod l (mod 4 when l = 2); exact mod l^m.
Mat2 mat_exp(const Mat2& x);

// Tuple of 2x2 blocks: one matrix per factor, shared (l, m).
class GroupElement {
public:
    explicit GroupElement(std::vector<Mat2> parts);

    unsigned n() const { return static_cast<unsigned>(parts_.size()); }
    uint64_t ell() const { return parts_[0].ell(); }
    unsigned precision() const { return parts_[0].precision(); }
    const Mat2& factor(unsigned i) const { return parts_.at(i); }

    static GroupElement identity(uint64_t ell, unsigned prec, unsigned n);

    GroupElement operator*(const GroupElement& o) const;
    GroupElement inverse() const;
    bool operator==(const GroupElement& o) const;
    bool operator!=(const GroupElement& o) const { return !(*this == o); }
    bool is_identity() const;
    bool congruent_identity(unsigned k) const;

    std::string str() const;

private:
    std::vector<Mat2> parts_;
};

GroupElement comm(const GroupElement& x, const GroupElement& y);
// Left-nested commutator: C(x1, x2) = [x1, x2], C(x1..xk) = [C(x1..x_{k-1}), xk].
GroupElement comm_iterated(const std::vector<GroupElement>& xs);
GroupElement group_pow(const GroupElement& g, int64_t e);

// Theta on a tuple: 3 coordinates per factor, order (x, h, y) within a factor.
std::vector<PadicScalar> theta_tuple(const GroupElement& g);

// Iterate h -> h^r until fixed.  Throws NonConvergence past max_iters.
GroupElement power_stabilize(const GroupElement& g, uint64_t r, unsigned max_iters = 0);

// g^beta for an l-adic exponent; every factor of g must be identity mod l
// (mod 4 when l = 2) so that digit truncation is exact at precision m.
GroupElement power_padic(const GroupElement& g, const PadicScalar& beta);

// R(c S) [R(c), L(d)] L(-d S) with S = sum_{i=1}^{N} (ab)^i.  For cutoff
// N >= m and (c, d) = (a, b), ab = 0 mod l, this equals
// diag((1 - ab)^-1, 1 - ab); the (2,2) entry is 1 - cd in general.
Mat2 diag_limit_product(const PadicScalar& a, const PadicScalar& b,
                        const PadicScalar& c, const PadicScalar& d, unsigned N);

} // namespace pinkforge
