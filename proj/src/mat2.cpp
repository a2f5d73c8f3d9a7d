#include "pinkforge/mat2.hpp"

#include <sstream>

namespace pinkforge {

namespace {

constexpr uint64_t kWorkCap = uint64_t{1} << 62;

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

using Raw = std::array<uint64_t, 4>;

Raw raw_mul(const Raw& x, const Raw& y, uint64_t mod) {
    return {
        (mulmod_u64(x[0], y[0], mod) + mulmod_u64(x[1], y[2], mod)) % mod,
        (mulmod_u64(x[0], y[1], mod) + mulmod_u64(x[1], y[3], mod)) % mod,
        (mulmod_u64(x[2], y[0], mod) + mulmod_u64(x[3], y[2], mod)) % mod,
        (mulmod_u64(x[2], y[1], mod) + mulmod_u64(x[3], y[3], mod)) % mod,
    };
}

uint64_t shift_down(uint64_t x, uint64_t ell, unsigned e) {
    for (unsigned i = 0; i < e; ++i) {
        if (x % ell != 0)
            throw LemmaViolation("matrix series: residue " + std::to_string(x) +
                                 " not divisible by " + std::to_string(ell));
        x /= ell;
    }
    return x;
}

} // namespace

Mat2::Mat2(const PadicScalar& a, const PadicScalar& b,
           const PadicScalar& c, const PadicScalar& d)
    : e_{a, b, c, d} {
    for (unsigned i = 1; i < 4; ++i)
        if (e_[i].ell() != e_[0].ell() || e_[i].precision() != e_[0].precision())
            throw DomainError("Mat2: entries disagree on (l, m)");
}

Mat2 Mat2::identity(uint64_t ell, unsigned prec) {
    PadicScalar one(ell, prec, 1), zero(ell, prec, 0);
    return Mat2(one, zero, zero, one);
}

Mat2 Mat2::zero(uint64_t ell, unsigned prec) {
    PadicScalar z(ell, prec, 0);
    return Mat2(z, z, z, z);
}

Mat2 Mat2::from_residues(uint64_t ell, unsigned prec,
                         const std::array<uint64_t, 4>& abcd) {
    return Mat2(PadicScalar::from_residue(ell, prec, abcd[0]),
                PadicScalar::from_residue(ell, prec, abcd[1]),
                PadicScalar::from_residue(ell, prec, abcd[2]),
                PadicScalar::from_residue(ell, prec, abcd[3]));
}

Mat2 Mat2::operator*(const Mat2& o) const {
    return Mat2(e_[0] * o.e_[0] + e_[1] * o.e_[2],
                e_[0] * o.e_[1] + e_[1] * o.e_[3],
                e_[2] * o.e_[0] + e_[3] * o.e_[2],
                e_[2] * o.e_[1] + e_[3] * o.e_[3]);
}

Mat2 Mat2::operator+(const Mat2& o) const {
    return Mat2(e_[0] + o.e_[0], e_[1] + o.e_[1], e_[2] + o.e_[2], e_[3] + o.e_[3]);
}

Mat2 Mat2::operator-(const Mat2& o) const {
    return Mat2(e_[0] - o.e_[0], e_[1] - o.e_[1], e_[2] - o.e_[2], e_[3] - o.e_[3]);
}

Mat2 Mat2::scaled(const PadicScalar& s) const {
    return Mat2(e_[0] * s, e_[1] * s, e_[2] * s, e_[3] * s);
}

PadicScalar Mat2::det() const { return e_[0] * e_[3] - e_[1] * e_[2]; }

PadicScalar Mat2::trace() const { return e_[0] + e_[3]; }

Mat2 Mat2::inverse() const {
    PadicScalar dinv = det().inverse();
    return Mat2(e_[3] * dinv, (-e_[1]) * dinv, (-e_[2]) * dinv, e_[0] * dinv);
}

bool Mat2::operator==(const Mat2& o) const {
    return e_[0] == o.e_[0] && e_[1] == o.e_[1] && e_[2] == o.e_[2] && e_[3] == o.e_[3];
}

bool Mat2::congruent_identity(unsigned k) const {
    if (k > precision())
        throw DomainError("congruent_identity: level exceeds precision");
    uint64_t lk = 1;
    for (unsigned i = 0; i < k; ++i) lk *= ell();
    return e_[0].residue() % lk == 1 % lk && e_[1].residue() % lk == 0 &&
           e_[2].residue() % lk == 0 && e_[3].residue() % lk == 1 % lk;
}

unsigned Mat2::depth_from_identity() const {
    Mat2 t = *this - identity(ell(), precision());
    unsigned v = precision();
    for (unsigned i = 0; i < 4; ++i)
        v = std::min(v, t.at(i).valuation());
    return v;
}

std::array<uint64_t, 4> Mat2::residues() const {
    return {e_[0].residue(), e_[1].residue(), e_[2].residue(), e_[3].residue()};
}

std::string Mat2::str() const {
    std::ostringstream os;
    os << "[[" << e_[0].residue() << "," << e_[1].residue() << "],["
       << e_[2].residue() << "," << e_[3].residue() << "]] mod "
       << ell() << "^" << precision();
    return os.str();
}

Mat2 gen_L(const PadicScalar& a) {
    PadicScalar one(a.ell(), a.precision(), 1), zero(a.ell(), a.precision(), 0);
    return Mat2(one, zero, a, one);
}

Mat2 gen_R(const PadicScalar& a) {
    PadicScalar one(a.ell(), a.precision(), 1), zero(a.ell(), a.precision(), 0);
    return Mat2(one, a, zero, one);
}

Mat2 gen_D(const PadicScalar& a) {
    PadicScalar one(a.ell(), a.precision(), 1), zero(a.ell(), a.precision(), 0);
    PadicScalar u = one + a;
    if (!u.is_unit())
        throw DomainError("gen_D: 1 + a must be a unit, a = " + a.str());
    return Mat2(u, zero, zero, u.inverse());
}

Mat2 gen_L(uint64_t ell, unsigned prec, int64_t a) { return gen_L(PadicScalar(ell, prec, a)); }
Mat2 gen_R(uint64_t ell, unsigned prec, int64_t a) { return gen_R(PadicScalar(ell, prec, a)); }
Mat2 gen_D(uint64_t ell, unsigned prec, int64_t a) { return gen_D(PadicScalar(ell, prec, a)); }

Mat2 comm(const Mat2& x, const Mat2& y) {
    return x * y * x.inverse() * y.inverse();
}

Mat2 mat_pow(const Mat2& g, int64_t e) {
    if (e < 0) return mat_pow(g.inverse(), -e);
    Mat2 acc = Mat2::identity(g.ell(), g.precision());
    Mat2 base = g;
    uint64_t k = static_cast<uint64_t>(e);
    while (k) {
        if (k & 1) acc = acc * base;
        base = base * base;
        k >>= 1;
    }
    return acc;
}

Mat2 conj(const Mat2& c, const Mat2& x) { return c * x * c.inverse(); }

std::array<PadicScalar, 3> theta_coords(const Mat2& g) {
    const uint64_t l = g.ell();
    const unsigned m = g.precision();
    if (l != 2) {
        PadicScalar inv2 = PadicScalar(l, m, 2).inverse();
        PadicScalar h = (g.at(0) - g.at(3)) * inv2;
        return {g.at(1), h, g.at(2)};
    }
    if (m < 2)
        throw DomainError("theta_coords: need precision >= 2 for l = 2");
    if (!g.congruent_identity(2))
        throw DomainError("theta_coords: matrix must be identity mod 4 for l = 2");
    uint64_t mod = g.at(0).modulus();
    uint64_t diff = (g.at(0).residue() + mod - g.at(3).residue()) % mod; // = 0 mod 4
    uint64_t h = (diff / 2) % (mod / 2);
    return {PadicScalar(2, m - 1, static_cast<int64_t>(g.at(1).residue() % (mod / 2))),
            PadicScalar(2, m - 1, static_cast<int64_t>(h)),
            PadicScalar(2, m - 1, static_cast<int64_t>(g.at(2).residue() % (mod / 2)))};
}

namespace {

struct SeriesPlan {
    uint64_t nterms;
    uint64_t wmod;
};

SeriesPlan log_plan(uint64_t l, unsigned m) {
    uint64_t nterms = m + floor_log(l, m) + 2;
    unsigned guard = floor_log(l, nterms) + 2;
    return {nterms, ipow_checked(l, m + guard, kWorkCap)};
}

SeriesPlan exp_plan(uint64_t l, unsigned m) {
    uint64_t nterms;
    if (l == 2)
        nterms = m;
    else if (l == 3)
        nterms = 2 * static_cast<uint64_t>(m) + 2;
    else
        nterms = (static_cast<uint64_t>(m) * (l - 1) - 1 + (l - 3)) / (l - 2) + 1;
    unsigned guard = val_factorial(nterms, l) + 1;
    return {nterms, ipow_checked(l, m + guard, kWorkCap)};
}

} // namespace

Mat2 mat_log(const Mat2& g) {
    const uint64_t l = g.ell();
    const unsigned m = g.precision();
    const unsigned lowv = (l == 2) ? 2u : 1u;
    if (!g.congruent_identity(std::min(lowv, m)))
        throw DomainError("mat_log: matrix must be identity mod l^" + std::to_string(lowv));
    const SeriesPlan plan = log_plan(l, m);
    const uint64_t wmod = plan.wmod;
    const uint64_t mod = g.at(0).modulus();

    Raw t = g.residues();
    t[0] = (t[0] + mod - 1) % mod;
    t[3] = (t[3] + mod - 1) % mod;
    Raw acc = {0, 0, 0, 0};
    Raw tk = {1, 0, 0, 1};
    for (uint64_t k = 1; k <= plan.nterms; ++k) {
        tk = raw_mul(tk, t, wmod);
        unsigned e = residue_valuation(k, l, 64);
        uint64_t unit = k;
        for (unsigned i = 0; i < e; ++i) unit /= l;
        uint64_t uinv = invmod_u64(unit, wmod);
        for (unsigned i = 0; i < 4; ++i) {
            uint64_t term = mulmod_u64(shift_down(tk[i], l, e), uinv, wmod);
            acc[i] = (k % 2 == 1) ? (acc[i] + term) % wmod : (acc[i] + wmod - term) % wmod;
        }
    }
    return Mat2::from_residues(l, m, {acc[0] % mod, acc[1] % mod, acc[2] % mod, acc[3] % mod});
}

Mat2 mat_exp(const Mat2& x) {
    const uint64_t l = x.ell();
    const unsigned m = x.precision();
    const unsigned lowv = (l == 2) ? 2u : 1u;
    for (unsigned i = 0; i < 4; ++i)
        if (!x.at(i).is_zero() && x.at(i).valuation() < lowv)
            throw DomainError("mat_exp: matrix must be 0 mod l^" + std::to_string(lowv));
    const SeriesPlan plan = exp_plan(l, m);
    const uint64_t wmod = plan.wmod;
    const uint64_t mod = x.at(0).modulus();

    const Raw t = x.residues();
    Raw acc = {1, 0, 0, 1};
    Raw tk = {1, 0, 0, 1};
    unsigned fact_e = 0;
    uint64_t fact_unit = 1;
    for (uint64_t k = 1; k <= plan.nterms; ++k) {
        tk = raw_mul(tk, t, wmod);
        unsigned e = residue_valuation(k, l, 64);
        fact_e += e;
        uint64_t unit = k;
        for (unsigned i = 0; i < e; ++i) unit /= l;
        fact_unit = mulmod_u64(fact_unit, unit, wmod);
        uint64_t finv = invmod_u64(fact_unit, wmod);
        for (unsigned i = 0; i < 4; ++i) {
            uint64_t term = mulmod_u64(shift_down(tk[i], l, fact_e), finv, wmod);
            acc[i] = (acc[i] + term) % wmod;
        }
    }
    return Mat2::from_residues(l, m, {acc[0] % mod, acc[1] % mod, acc[2] % mod, acc[3] % mod});
}

GroupElement::GroupElement(std::vector<Mat2> parts) : parts_(std::move(parts)) {
    if (parts_.empty())
        throw DomainError("GroupElement: need at least one factor");
    for (const Mat2& p : parts_)
        if (p.ell() != parts_[0].ell() || p.precision() != parts_[0].precision())
            throw DomainError("GroupElement: factors disagree on (l, m)");
}

GroupElement GroupElement::identity(uint64_t ell, unsigned prec, unsigned n) {
    std::vector<Mat2> parts(n, Mat2::identity(ell, prec));
    return GroupElement(std::move(parts));
}

GroupElement GroupElement::operator*(const GroupElement& o) const {
    if (o.n() != n())
        throw DomainError("GroupElement: factor count mismatch");
    std::vector<Mat2> parts;
    parts.reserve(n());
    for (unsigned i = 0; i < n(); ++i) parts.push_back(parts_[i] * o.parts_[i]);
    return GroupElement(std::move(parts));
}

GroupElement GroupElement::inverse() const {
    std::vector<Mat2> parts;
    parts.reserve(n());
    for (const Mat2& p : parts_) parts.push_back(p.inverse());
    return GroupElement(std::move(parts));
}

bool GroupElement::operator==(const GroupElement& o) const {
    if (o.n() != n()) return false;
    for (unsigned i = 0; i < n(); ++i)
        if (!(parts_[i] == o.parts_[i])) return false;
    return true;
}

bool GroupElement::is_identity() const {
    for (const Mat2& p : parts_)
        if (!(p == Mat2::identity(ell(), precision()))) return false;
    return true;
}

bool GroupElement::congruent_identity(unsigned k) const {
    for (const Mat2& p : parts_)
        if (!p.congruent_identity(k)) return false;
    return true;
}

std::string GroupElement::str() const {
    std::string s = "(";
    for (unsigned i = 0; i < n(); ++i) {
        if (i) s += ", ";
        s += parts_[i].str();
    }
    return s + ")";
}

GroupElement comm(const GroupElement& x, const GroupElement& y) {
    return x * y * x.inverse() * y.inverse();
}

GroupElement comm_iterated(const std::vector<GroupElement>& xs) {
    if (xs.size() < 2)
        throw DomainError("comm_iterated: need at least two elements");
    GroupElement acc = comm(xs[0], xs[1]);
    for (size_t i = 2; i < xs.size(); ++i) acc = comm(acc, xs[i]);
    return acc;
}

GroupElement group_pow(const GroupElement& g, int64_t e) {
    if (e < 0) return group_pow(g.inverse(), -e);
    GroupElement acc = GroupElement::identity(g.ell(), g.precision(), g.n());
    GroupElement base = g;
    uint64_t k = static_cast<uint64_t>(e);
    while (k) {
        if (k & 1) acc = acc * base;
        base = base * base;
        k >>= 1;
    }
    return acc;
}

std::vector<PadicScalar> theta_tuple(const GroupElement& g) {
    std::vector<PadicScalar> out;
    out.reserve(3 * g.n());
    for (unsigned i = 0; i < g.n(); ++i) {
        auto c = theta_coords(g.factor(i));
        out.push_back(c[0]);
        out.push_back(c[1]);
        out.push_back(c[2]);
    }
    return out;
}

GroupElement power_stabilize(const GroupElement& g, uint64_t r, unsigned max_iters) {
    if (g.ell() == 2)
        throw DomainError("power_stabilize: requires an odd prime");
    if (r < 2)
        throw DomainError("power_stabilize: exponent must be >= 2");
    if (max_iters == 0) {
        uint64_t bound = static_cast<uint64_t>(g.precision()) * r + 4;
        max_iters = bound > 100000 ? 100000u : static_cast<unsigned>(bound);
    }
    GroupElement cur = g;
    for (unsigned i = 0; i < max_iters; ++i) {
        GroupElement nxt = group_pow(cur, static_cast<int64_t>(r));
        if (nxt == cur) return cur;
        cur = nxt;
    }
    throw NonConvergence("power_stabilize: no fixed point within " +
                         std::to_string(max_iters) + " iterations");
}

GroupElement power_padic(const GroupElement& g, const PadicScalar& beta) {
    if (beta.ell() != g.ell())
        throw DomainError("power_padic: exponent prime mismatch");
    const unsigned lowv = (g.ell() == 2) ? 2u : 1u;
    if (!g.congruent_identity(std::min(lowv, g.precision())))
        throw DomainError("power_padic: base must be identity mod l^" + std::to_string(lowv));
    const uint64_t l = g.ell();
    uint64_t rem = beta.residue();
    GroupElement acc = GroupElement::identity(g.ell(), g.precision(), g.n());
    GroupElement p = g;
    for (unsigned j = 0; j < std::min(beta.precision(), g.precision()); ++j) {
        uint64_t digit = rem % l;
        rem /= l;
        if (digit) acc = acc * group_pow(p, static_cast<int64_t>(digit));
        p = group_pow(p, static_cast<int64_t>(l));
    }
    return acc;
}

Mat2 diag_limit_product(const PadicScalar& a, const PadicScalar& b,
                        const PadicScalar& c, const PadicScalar& d, unsigned N) {
    if (a.valuation() < 1 || b.valuation() < 1 || c.valuation() < 1 || d.valuation() < 1)
        throw DomainError("diag_limit_product: all four arguments need valuation >= 1");
    PadicScalar ab = a * b;
    PadicScalar s(a.ell(), a.precision(), 0);
    PadicScalar p(a.ell(), a.precision(), 1);
    for (unsigned i = 1; i <= N; ++i) {
        p = p * ab;
        s = s + p;
    }
    return gen_R(c * s) * comm(gen_R(c), gen_L(d)) * gen_L(-(d * s));
}

} // namespace pinkforge
