#pragma once

#include <cstdint>
#include <string>

#include "pinkforge/errors.hpp"

namespace pinkforge {

// ---- modular helpers on raw residues ----

bool is_prime_u64(uint64_t p);

// base^exp, throwing DomainError once the value reaches `limit`.
uint64_t ipow_checked(uint64_t base, unsigned exp, uint64_t limit);

uint64_t mulmod_u64(uint64_t a, uint64_t b, uint64_t mod);
uint64_t powmod_u64(uint64_t a, uint64_t e, uint64_t mod);
// Inverse of a unit; DomainError if gcd(a, mod) != 1.
uint64_t invmod_u64(uint64_t a, uint64_t mod);
// l-adic valuation of the residue x, capped at `cap` (v(0) = cap).
unsigned residue_valuation(uint64_t x, uint64_t ell, unsigned cap);

// Truncated l-adic integer: a residue mod l^m tagged with (l, m).
// Binary operations require both operands to carry the same (l, m).
class PadicScalar {
public:
    PadicScalar(uint64_t ell, unsigned precision, int64_t value);

    static PadicScalar from_residue(uint64_t ell, unsigned precision, uint64_t residue);

    uint64_t ell() const { return ell_; }
    unsigned precision() const { return prec_; }
    uint64_t modulus() const { return mod_; }
    uint64_t residue() const { return res_; }

    bool is_zero() const { return res_ == 0; }
    bool is_unit() const { return res_ % ell_ != 0; }
    // Valuation of a residue known mod l^m is capped: valuation(0) = m.
    unsigned valuation() const { return residue_valuation(res_, ell_, prec_); }

    PadicScalar inverse() const;

    PadicScalar operator+(const PadicScalar& o) const;
    PadicScalar operator-(const PadicScalar& o) const;
    PadicScalar operator*(const PadicScalar& o) const;
    PadicScalar operator-() const;

    bool operator==(const PadicScalar& o) const;
    bool operator!=(const PadicScalar& o) const { return !(*this == o); }

    // Truncate to a smaller precision (explicit, never implicit).
    PadicScalar truncated(unsigned new_precision) const;

    // Exact division by l^k at unchanged precision; the residue must allow it.
    PadicScalar shifted_down(unsigned k) const;

    std::string str() const;

private:
    PadicScalar() = default;
    void check_compatible(const PadicScalar& o) const;

    uint64_t ell_ = 0;
    unsigned prec_ = 0;
    uint64_t mod_ = 0;
    uint64_t res_ = 0;
};

PadicScalar pow_scalar(const PadicScalar& a, int64_t e);

// log of a 1-unit: requires v(x - 1) >= 1 for odd l, >= 2 for l = 2.
// Computed with guard digits so the returned residue is exact mod l^m.
PadicScalar log_unit(const PadicScalar& x);

// exp of a small element: requires v(t) >= 1 for odd l, >= 2 for l = 2.
PadicScalar exp_unit(const PadicScalar& t);

// Teichmueller representative of a unit: the unique (l-1)-th root of unity
// congruent to x mod l.  For l = 2 every unit lifts to 1.
PadicScalar teichmuller(const PadicScalar& x);

} // namespace pinkforge
