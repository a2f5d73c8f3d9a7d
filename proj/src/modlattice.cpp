#include "pinkforge/modlattice.hpp"

#include <algorithm>
#include <sstream>

namespace pinkforge {

namespace {

constexpr uint64_t kScalarCap = uint64_t{1} << 61;

uint64_t pow_small(uint64_t ell, unsigned e) {
    uint64_t r = 1;
    for (unsigned i = 0; i < e; ++i) r *= ell;
    return r;
}

} // namespace

ModLattice::ModLattice(uint64_t ell, unsigned prec, unsigned dim)
    : ell_(ell), prec_(prec), mod_(ipow_checked(ell, prec, kScalarCap)), dim_(dim) {
    if (!is_prime_u64(ell))
        throw DomainError("ModLattice: " + std::to_string(ell) + " is not prime");
    if (prec == 0 || dim == 0)
        throw DomainError("ModLattice: precision and dimension must be >= 1");
}

ModLattice ModLattice::zero_lattice(uint64_t ell, unsigned prec, unsigned dim) {
    return ModLattice(ell, prec, dim);
}

ModLattice ModLattice::scaled_full(uint64_t ell, unsigned prec, unsigned dim, unsigned k) {
    std::vector<std::vector<uint64_t>> gens;
    uint64_t mod = ipow_checked(ell, prec, kScalarCap);
    uint64_t lk = pow_small(ell, k);
    for (unsigned i = 0; i < dim; ++i) {
        std::vector<uint64_t> v(dim, 0);
        v[i] = lk % mod;
        gens.push_back(std::move(v));
    }
    return span(ell, prec, dim, gens);
}

ModLattice ModLattice::span(uint64_t ell, unsigned prec, unsigned dim,
                            const std::vector<std::vector<uint64_t>>& gens) {
    ModLattice lat(ell, prec, dim);
    const uint64_t mod = lat.mod_;

    std::vector<std::vector<uint64_t>> pool;
    pool.reserve(gens.size());
    for (const auto& g : gens) {
        if (g.size() != dim)
            throw DomainError("ModLattice::span: generator has wrong dimension");
        std::vector<uint64_t> r(dim);
        bool nonzero = false;
        for (unsigned i = 0; i < dim; ++i) {
            r[i] = g[i] % mod;
            nonzero |= (r[i] != 0);
        }
        if (nonzero) pool.push_back(std::move(r));
    }

    struct PivotRow {
        unsigned col;
        unsigned exp;
        std::vector<uint64_t> row;
    };
    std::vector<PivotRow> found;

    for (unsigned c = 0; c < dim; ++c) {
        // pick the row with the smallest valuation in column c
        size_t best = pool.size();
        unsigned best_val = prec + 1;
        for (size_t i = 0; i < pool.size(); ++i) {
            if (pool[i][c] == 0) continue;
            unsigned v = residue_valuation(pool[i][c], ell, prec);
            if (v < best_val) {
                best_val = v;
                best = i;
            }
        }
        if (best == pool.size()) continue;

        std::vector<uint64_t> r0 = std::move(pool[best]);
        pool.erase(pool.begin() + static_cast<long>(best));
        const unsigned e = best_val;
        const uint64_t le = pow_small(ell, e);
        uint64_t unit_inv = invmod_u64(r0[c] / le, mod);
        for (auto& x : r0) x = mulmod_u64(x, unit_inv, mod);

        for (auto& r : pool) {
            if (r[c] == 0) continue;
            uint64_t q = r[c] / le; // exact: val(r[c]) >= e by pivot minimality
            for (unsigned i = 0; i < dim; ++i) {
                uint64_t sub = mulmod_u64(q, r0[i], mod);
                r[i] = (r[i] + mod - sub) % mod;
            }
        }
        // annihilator of the pivot scale re-enters the pool
        if (e > 0) {
            uint64_t ann = mod / le;
            std::vector<uint64_t> extra(dim);
            bool nonzero = false;
            for (unsigned i = 0; i < dim; ++i) {
                extra[i] = mulmod_u64(ann, r0[i], mod);
                nonzero |= (extra[i] != 0);
            }
            if (nonzero) pool.push_back(std::move(extra));
        }
        found.push_back(PivotRow{c, e, std::move(r0)});
        pool.erase(std::remove_if(pool.begin(), pool.end(),
                                  [](const std::vector<uint64_t>& r) {
                                      return std::all_of(r.begin(), r.end(),
                                                         [](uint64_t x) { return x == 0; });
                                  }),
                   pool.end());
    }

    // reduce entries above each pivot into the canonical range mod l^e
    for (size_t j = 0; j < found.size(); ++j) {
        const uint64_t le = pow_small(ell, found[j].exp);
        for (size_t i = 0; i < j; ++i) {
            uint64_t q = found[i].row[found[j].col] / le;
            if (q == 0) continue;
            for (unsigned k = 0; k < dim; ++k) {
                uint64_t sub = mulmod_u64(q, found[j].row[k], mod);
                found[i].row[k] = (found[i].row[k] + mod - sub) % mod;
            }
        }
    }

    for (auto& p : found) {
        lat.rows_.push_back(std::move(p.row));
        lat.pivots_.emplace_back(p.col, p.exp);
    }
    return lat;
}

bool ModLattice::contains(const std::vector<uint64_t>& v) const {
    if (v.size() != dim_)
        throw DomainError("ModLattice::contains: wrong dimension");
    std::vector<uint64_t> w(dim_);
    for (unsigned i = 0; i < dim_; ++i) w[i] = v[i] % mod_;
    for (size_t j = 0; j < rows_.size(); ++j) {
        const unsigned c = pivots_[j].first;
        if (w[c] == 0) continue;
        const unsigned e = pivots_[j].second;
        if (residue_valuation(w[c], ell_, prec_) < e) return false;
        uint64_t q = w[c] / pow_small(ell_, e);
        for (unsigned i = 0; i < dim_; ++i) {
            uint64_t sub = mulmod_u64(q, rows_[j][i], mod_);
            w[i] = (w[i] + mod_ - sub) % mod_;
        }
    }
    return std::all_of(w.begin(), w.end(), [](uint64_t x) { return x == 0; });
}

bool ModLattice::contains_lattice(const ModLattice& o) const {
    if (o.ell_ != ell_ || o.prec_ != prec_ || o.dim_ != dim_)
        throw DomainError("ModLattice::contains_lattice: parameter mismatch");
    return std::all_of(o.rows_.begin(), o.rows_.end(),
                       [this](const std::vector<uint64_t>& r) { return contains(r); });
}

bool ModLattice::operator==(const ModLattice& o) const {
    return ell_ == o.ell_ && prec_ == o.prec_ && dim_ == o.dim_ && rows_ == o.rows_;
}

ModLattice ModLattice::sum(const ModLattice& o) const {
    if (o.ell_ != ell_ || o.prec_ != prec_ || o.dim_ != dim_)
        throw DomainError("ModLattice::sum: parameter mismatch");
    std::vector<std::vector<uint64_t>> gens = rows_;
    gens.insert(gens.end(), o.rows_.begin(), o.rows_.end());
    return span(ell_, prec_, dim_, gens);
}

ModLattice ModLattice::apply(const std::vector<std::vector<uint64_t>>& op) const {
    if (op.size() != dim_)
        throw DomainError("ModLattice::apply: operator has wrong shape");
    for (const auto& r : op)
        if (r.size() != dim_)
            throw DomainError("ModLattice::apply: operator has wrong shape");
    std::vector<std::vector<uint64_t>> gens;
    gens.reserve(rows_.size());
    for (const auto& r : rows_) {
        std::vector<uint64_t> w(dim_, 0);
        for (unsigned i = 0; i < dim_; ++i) {
            uint64_t acc = 0;
            for (unsigned j = 0; j < dim_; ++j)
                acc = (acc + mulmod_u64(op[i][j] % mod_, r[j], mod_)) % mod_;
            w[i] = acc;
        }
        gens.push_back(std::move(w));
    }
    return span(ell_, prec_, dim_, gens);
}

unsigned ModLattice::min_valuation() const {
    unsigned v = prec_;
    for (const auto& r : rows_)
        for (uint64_t x : r)
            v = std::min(v, residue_valuation(x, ell_, prec_));
    return v;
}

bool ModLattice::contains_scaled_basis(unsigned k) const {
    uint64_t lk = pow_small(ell_, k) % mod_;
    for (unsigned i = 0; i < dim_; ++i) {
        std::vector<uint64_t> v(dim_, 0);
        v[i] = lk;
        if (!contains(v)) return false;
    }
    return true;
}

std::string ModLattice::str() const {
    std::ostringstream os;
    os << "lattice mod " << ell_ << "^" << prec_ << " dim " << dim_ << ":";
    if (rows_.empty()) os << " (zero)";
    for (const auto& r : rows_) {
        os << " [";
        for (unsigned i = 0; i < dim_; ++i) os << (i ? "," : "") << r[i];
        os << "]";
    }
    return os.str();
}

std::vector<std::vector<uint64_t>> conj_operator(const Mat2& c) {
    const uint64_t l = c.ell();
    const unsigned m = c.precision();
    const Mat2 cinv = c.inverse();
    std::vector<std::vector<uint64_t>> op(3, std::vector<uint64_t>(3, 0));
    const std::array<std::array<int64_t, 4>, 3> basis = {{
        {0, 1, 0, 0},  // x
        {1, 0, 0, -1}, // h
        {0, 0, 1, 0},  // y
    }};
    for (unsigned j = 0; j < 3; ++j) {
        Mat2 b = Mat2(PadicScalar(l, m, basis[j][0]), PadicScalar(l, m, basis[j][1]),
                      PadicScalar(l, m, basis[j][2]), PadicScalar(l, m, basis[j][3]));
        Mat2 im = cinv * b * c;
        // trace-zero is preserved, so coordinates read off directly
        op[0][j] = im.at(1).residue();
        op[1][j] = im.at(0).residue();
        op[2][j] = im.at(2).residue();
    }
    return op;
}

ModLattice conj_saturate(const ModLattice& w, unsigned s, unsigned t) {
    const uint64_t l = w.ell();
    const unsigned m = w.precision();
    if (w.dim() != 3)
        throw DomainError("conj_saturate: expects a rank-3 coordinate module");
    const unsigned v = (l == 2) ? 1u : 0u;
    if (l == 2 && s < 2)
        throw PreconditionError("conj_saturate: need s >= 2 for l = 2");
    if (l != 2 && s < 1)
        throw PreconditionError("conj_saturate: need s >= 1");
    const unsigned target = t + 4 * s + 4 * v;
    if (target >= m)
        throw PreconditionError("conj_saturate: t + 4s + 4v must be below the precision");
    if (w.min_valuation() > t)
        throw PreconditionError("conj_saturate: module vanishes mod l^{t+1}");

    const int64_t ls = static_cast<int64_t>(pow_small(l, s));
    const std::array<Mat2, 3> cs = {gen_L(l, m, ls), gen_R(l, m, ls), gen_D(l, m, ls)};
    std::array<std::vector<std::vector<uint64_t>>, 3> ops;
    for (unsigned i = 0; i < 3; ++i) ops[i] = conj_operator(cs[i]);

    ModLattice cur = w;
    const unsigned max_steps = 3 * m + 8;
    for (unsigned step = 0; step < max_steps; ++step) {
        ModLattice nxt = cur;
        for (const auto& op : ops) nxt = nxt.sum(cur.apply(op));
        if (nxt == cur) {
            if (!cur.contains_scaled_basis(target))
                throw LemmaViolation("conj_saturate: closure misses l^" +
                                     std::to_string(target) + " sl2, input " + w.str());
            return cur;
        }
        cur = nxt;
    }
    throw NonConvergence("conj_saturate: closure did not settle");
}

} // namespace pinkforge
