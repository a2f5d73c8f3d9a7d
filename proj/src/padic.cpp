#include "pinkforge/padic.hpp"

#include <sstream>

namespace pinkforge {

namespace {

constexpr uint64_t kScalarCap = uint64_t{1} << 61;
// Series run at m + guard digits; the working modulus gets a little more room.
constexpr uint64_t kWorkCap = uint64_t{1} << 62;

// floor(log_l(x)) for x >= 1
unsigned floor_log(uint64_t ell, uint64_t x) {
    unsigned e = 0;
    uint64_t p = 1;
    while (p <= x / ell) {
        p *= ell;
        ++e;
    }
    return e;
}

unsigned val_factorial(uint64_t n, uint64_t ell) {
    unsigned v = 0;
    for (uint64_t p = ell; p <= n; p *= ell) {
        v += static_cast<unsigned>(n / p);
        if (p > n / ell) break;
    }
    return v;
}

} // namespace

bool is_prime_u64(uint64_t p) {
    if (p < 2) return false;
    if (p % 2 == 0) return p == 2;
    for (uint64_t d = 3; d * d <= p; d += 2)
        if (p % d == 0) return false;
    return true;
}

uint64_t ipow_checked(uint64_t base, unsigned exp, uint64_t limit) {
    uint64_t r = 1;
    for (unsigned i = 0; i < exp; ++i) {
        if (r >= limit / base + 1 || r * base >= limit)
            throw DomainError("modulus overflow: " + std::to_string(base) + "^" +
                              std::to_string(exp) + " exceeds cap");
        r *= base;
    }
    return r;
}

uint64_t mulmod_u64(uint64_t a, uint64_t b, uint64_t mod) {
    return static_cast<uint64_t>((static_cast<unsigned __int128>(a) * b) % mod);
}

uint64_t powmod_u64(uint64_t a, uint64_t e, uint64_t mod) {
    uint64_t r = 1 % mod;
    a %= mod;
    while (e) {
        if (e & 1) r = mulmod_u64(r, a, mod);
        a = mulmod_u64(a, a, mod);
        e >>= 1;
    }
    return r;
}

uint64_t invmod_u64(uint64_t a, uint64_t mod) {
    a %= mod;
    __int128 t = 0, nt = 1;
    __int128 r = mod, nr = a;
    while (nr != 0) {
        __int128 q = r / nr;
        __int128 tmp = t - q * nt;
        t = nt; nt = tmp;
        tmp = r - q * nr;
        r = nr; nr = tmp;
    }
    if (r != 1)
        throw DomainError("invmod: " + std::to_string(a) + " is not a unit mod " +
                          std::to_string(mod));
    if (t < 0) t += mod;
    return static_cast<uint64_t>(t);
}

unsigned residue_valuation(uint64_t x, uint64_t ell, unsigned cap) {
    if (x == 0) return cap;
    unsigned v = 0;
    while (v < cap && x % ell == 0) {
        x /= ell;
        ++v;
    }
    return v;
}

PadicScalar::PadicScalar(uint64_t ell, unsigned precision, int64_t value) {
    if (!is_prime_u64(ell))
        throw DomainError("PadicScalar: " + std::to_string(ell) + " is not prime");
    if (precision == 0)
        throw DomainError("PadicScalar: precision must be >= 1");
    ell_ = ell;
    prec_ = precision;
    mod_ = ipow_checked(ell, precision, kScalarCap);
    int64_t r = value % static_cast<int64_t>(mod_);
    if (r < 0) r += static_cast<int64_t>(mod_);
    res_ = static_cast<uint64_t>(r);
}

PadicScalar PadicScalar::from_residue(uint64_t ell, unsigned precision, uint64_t residue) {
    PadicScalar s(ell, precision, 0);
    s.res_ = residue % s.mod_;
    return s;
}

void PadicScalar::check_compatible(const PadicScalar& o) const {
    if (ell_ != o.ell_ || prec_ != o.prec_)
        throw DomainError("PadicScalar: mixed (l, m): (" + std::to_string(ell_) + "," +
                          std::to_string(prec_) + ") vs (" + std::to_string(o.ell_) + "," +
                          std::to_string(o.prec_) + ")");
}

PadicScalar PadicScalar::inverse() const {
    if (!is_unit())
        throw DomainError("PadicScalar::inverse: not a unit: " + str());
    return from_residue(ell_, prec_, invmod_u64(res_, mod_));
}

PadicScalar PadicScalar::operator+(const PadicScalar& o) const {
    check_compatible(o);
    uint64_t r = res_ + o.res_;
    if (r >= mod_) r -= mod_;
    return from_residue(ell_, prec_, r);
}

PadicScalar PadicScalar::operator-(const PadicScalar& o) const {
    check_compatible(o);
    uint64_t r = res_ >= o.res_ ? res_ - o.res_ : res_ + mod_ - o.res_;
    return from_residue(ell_, prec_, r);
}

PadicScalar PadicScalar::operator*(const PadicScalar& o) const {
    check_compatible(o);
    return from_residue(ell_, prec_, mulmod_u64(res_, o.res_, mod_));
}

PadicScalar PadicScalar::operator-() const {
    return from_residue(ell_, prec_, res_ == 0 ? 0 : mod_ - res_);
}

bool PadicScalar::operator==(const PadicScalar& o) const {
    return ell_ == o.ell_ && prec_ == o.prec_ && res_ == o.res_;
}

PadicScalar PadicScalar::truncated(unsigned new_precision) const {
    if (new_precision == 0 || new_precision > prec_)
        throw DomainError("PadicScalar::truncated: bad target precision");
    return PadicScalar(ell_, new_precision, static_cast<int64_t>(
        res_ % ipow_checked(ell_, new_precision, kScalarCap)));
}

PadicScalar PadicScalar::shifted_down(unsigned k) const {
    if (k == 0) return *this;
    if (k > prec_)
        throw DomainError("PadicScalar::shifted_down: shift exceeds precision");
    uint64_t d = ipow_checked(ell_, k, kScalarCap);
    if (res_ % d != 0)
        throw DomainError("PadicScalar::shifted_down: residue not divisible by l^k");
    return PadicScalar(ell_, prec_, static_cast<int64_t>(res_ / d));
}

std::string PadicScalar::str() const {
    std::ostringstream os;
    os << res_ << " (mod " << ell_ << "^" << prec_ << ")";
    return os.str();
}

PadicScalar pow_scalar(const PadicScalar& a, int64_t e) {
    if (e < 0) return pow_scalar(a.inverse(), -e);
    return PadicScalar::from_residue(a.ell(), a.precision(),
                                     powmod_u64(a.residue(), static_cast<uint64_t>(e),
                                                a.modulus()));
}

namespace {

// Exact division of a residue by l^e.  Valid when the represented value has
// valuation >= e, in which case l^e divides the canonical residue itself.
uint64_t shift_down(uint64_t x, uint64_t ell, unsigned e) {
    for (unsigned i = 0; i < e; ++i) {
        if (x % ell != 0)
            throw LemmaViolation("shift_down: residue " + std::to_string(x) +
                                 " not divisible by " + std::to_string(ell));
        x /= ell;
    }
    return x;
}

} // namespace

PadicScalar log_unit(const PadicScalar& x) {
    const uint64_t l = x.ell();
    const unsigned m = x.precision();
    const unsigned lowv = (l == 2) ? 2u : 1u;
    const PadicScalar one(l, m, 1);
    const PadicScalar t0 = x - one;
    if (!t0.is_zero() && t0.valuation() < lowv)
        throw DomainError("log_unit: argument must be 1 mod " + std::to_string(l) +
                          (l == 2 ? "^2" : ""));
    // Enough terms that every dropped term t^k/k vanishes mod l^m.
    const uint64_t nterms = m + floor_log(l, m) + 2;
    const unsigned guard = floor_log(l, nterms) + 2;
    const unsigned M = m + guard;
    const uint64_t wmod = ipow_checked(l, M, kWorkCap);

    const uint64_t t = t0.residue(); // canonical lift, still divisible by l^lowv
    uint64_t acc = 0;
    uint64_t tk = 1;
    for (uint64_t k = 1; k <= nterms; ++k) {
        tk = mulmod_u64(tk, t, wmod);
        unsigned e = residue_valuation(k, l, M);
        uint64_t unit = k;
        for (unsigned i = 0; i < e; ++i) unit /= l;
        uint64_t term = mulmod_u64(shift_down(tk, l, e), invmod_u64(unit, wmod), wmod);
        if (k % 2 == 1)
            acc = (acc + term) % wmod;
        else
            acc = (acc + wmod - term) % wmod;
    }
    return PadicScalar(l, m, static_cast<int64_t>(acc % x.modulus()));
}

PadicScalar exp_unit(const PadicScalar& t) {
    const uint64_t l = t.ell();
    const unsigned m = t.precision();
    const unsigned lowv = (l == 2) ? 2u : 1u;
    if (!t.is_zero() && t.valuation() < lowv)
        throw DomainError("exp_unit: argument must be 0 mod " + std::to_string(l) +
                          (l == 2 ? "^2" : ""));
    uint64_t nterms;
    if (l == 2)
        nterms = m;
    else if (l == 3)
        nterms = 2 * static_cast<uint64_t>(m) + 2;
    else
        nterms = (static_cast<uint64_t>(m) * (l - 1) - 1 + (l - 3)) / (l - 2) + 1;
    const unsigned guard = val_factorial(nterms, l) + 1;
    const unsigned M = m + guard;
    const uint64_t wmod = ipow_checked(l, M, kWorkCap);

    const uint64_t tr = t.residue();
    uint64_t acc = 1;
    uint64_t tk = 1;
    unsigned fact_e = 0;
    uint64_t fact_unit = 1;
    for (uint64_t k = 1; k <= nterms; ++k) {
        tk = mulmod_u64(tk, tr, wmod);
        unsigned e = residue_valuation(k, l, M);
        fact_e += e;
        uint64_t unit = k;
        for (unsigned i = 0; i < e; ++i) unit /= l;
        fact_unit = mulmod_u64(fact_unit, unit, wmod);
        uint64_t term = mulmod_u64(shift_down(tk, l, fact_e),
                                   invmod_u64(fact_unit, wmod), wmod);
        acc = (acc + term) % wmod;
    }
    return PadicScalar(l, m, static_cast<int64_t>(acc % t.modulus()));
}

PadicScalar teichmuller(const PadicScalar& x) {
    if (!x.is_unit())
        throw DomainError("teichmuller: not a unit: " + x.str());
    if (x.ell() == 2)
        return PadicScalar(2, x.precision(), 1);
    uint64_t cur = x.residue();
    const uint64_t mod = x.modulus();
    const uint64_t l = x.ell();
    for (unsigned i = 0; i < x.precision() + 2; ++i) {
        uint64_t nxt = powmod_u64(cur, l, mod);
        if (nxt == cur)
            return PadicScalar::from_residue(x.ell(), x.precision(), cur);
        cur = nxt;
    }
    throw NonConvergence("teichmuller: iteration did not settle for " + x.str());
}

} // namespace pinkforge
