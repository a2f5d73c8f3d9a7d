#include "pinkforge/group.hpp"

#include <algorithm>
#include <cstring>
#include <sstream>

#include "pinkforge/errors.hpp"

namespace pinkforge {

namespace {

// Raw products of two packed entries must fit in uint64.
constexpr uint64_t kPackLimit = uint64_t(1) << 31;

uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

uint64_t hash_words(const uint32_t* p, std::size_t k) {
    uint64_t h = 0x243f6a8885a308d3ull;
    for (std::size_t i = 0; i < k; ++i) h = mix64(h ^ p[i]);
    return h;
}

void mul_words(const uint32_t* a, const uint32_t* b, uint32_t* out,
               uint64_t mod, unsigned n) {
    for (unsigned f = 0; f < n; ++f, a += 4, b += 4, out += 4) {
        uint64_t a0 = a[0], a1 = a[1], a2 = a[2], a3 = a[3];
        uint64_t b0 = b[0], b1 = b[1], b2 = b[2], b3 = b[3];
        out[0] = static_cast<uint32_t>((a0 * b0 + a1 * b2) % mod);
        out[1] = static_cast<uint32_t>((a0 * b1 + a1 * b3) % mod);
        out[2] = static_cast<uint32_t>((a2 * b0 + a3 * b2) % mod);
        out[3] = static_cast<uint32_t>((a2 * b1 + a3 * b3) % mod);
    }
}

// det 1 per part: the inverse is the adjugate.
void inv_words(const uint32_t* a, uint32_t* out, uint64_t mod, unsigned n) {
    for (unsigned f = 0; f < n; ++f, a += 4, out += 4) {
        uint32_t a0 = a[0], a1 = a[1], a2 = a[2], a3 = a[3];
        out[0] = a3;
        out[1] = a1 ? static_cast<uint32_t>(mod - a1) : 0;
        out[2] = a2 ? static_cast<uint32_t>(mod - a2) : 0;
        out[3] = a0;
    }
}

void encode_element(const GroupElement& g, uint32_t* out) {
    for (unsigned f = 0; f < g.n(); ++f)
        for (unsigned i = 0; i < 4; ++i)
            *out++ = static_cast<uint32_t>(g.factor(f).at(i).residue());
}

GroupElement decode_element(const uint32_t* p, uint64_t ell, unsigned prec, unsigned n) {
    std::vector<Mat2> parts;
    parts.reserve(n);
    for (unsigned f = 0; f < n; ++f, p += 4)
        parts.push_back(Mat2::from_residues(ell, prec, {p[0], p[1], p[2], p[3]}));
    return GroupElement(std::move(parts));
}

bool words_less(const uint32_t* a, const uint32_t* b, std::size_t k) {
    for (std::size_t i = 0; i < k; ++i) {
        if (a[i] != b[i]) return a[i] < b[i];
    }
    return false;
}

void identity_words(uint32_t* out, unsigned n) {
    for (unsigned f = 0; f < n; ++f, out += 4) {
        out[0] = 1; out[1] = 0; out[2] = 0; out[3] = 1;
    }
}

bool is_identity_words_mod(const uint32_t* p, uint64_t q, unsigned n) {
    for (unsigned f = 0; f < n; ++f, p += 4) {
        if (p[0] % q != 1 % q || p[1] % q != 0 || p[2] % q != 0 || p[3] % q != 1 % q)
            return false;
    }
    return true;
}

uint64_t pow_u64(uint64_t base, unsigned e) {
    uint64_t r = 1;
    for (unsigned i = 0; i < e; ++i) r *= base;
    return r;
}

void check_shared_frame(const std::vector<GroupElement>& xs, const char* who) {
    if (xs.empty()) throw PreconditionError(std::string(who) + ": empty element list");
    uint64_t ell = xs[0].ell();
    unsigned prec = xs[0].precision(), n = xs[0].n();
    PadicScalar one(ell, prec, 1);
    for (const auto& g : xs) {
        if (g.ell() != ell || g.precision() != prec || g.n() != n)
            throw DomainError(std::string(who) + ": mixed (l, m, n) parameters");
        for (unsigned f = 0; f < n; ++f)
            if (g.factor(f).det() != one)
                throw DomainError(std::string(who) + ": determinant is not 1");
    }
}

std::vector<GroupElement> concat(const std::vector<GroupElement>& a,
                                 const std::vector<GroupElement>& b) {
    std::vector<GroupElement> out = a;
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

} // namespace

// Append-only arena plus open-addressing index; the canonical sort happens
// once at the end, so BFS discovery order never leaks into results.
class GroupBuilder {
public:
    GroupBuilder(uint64_t ell, unsigned prec, unsigned n, std::size_t cap)
        : ell_(ell), prec_(prec), n_(n), stride_(4u * n), cap_(cap) {
        if (n == 0) throw DomainError("FiniteGroup: needs at least one factor");
        mod_ = 1;
        for (unsigned i = 0; i < prec; ++i) {
            mod_ *= ell;
            if (mod_ >= kPackLimit)
                throw DomainError("FiniteGroup: needs l^m < 2^31 for packing");
        }
        slots_.assign(1024, 0);
    }

    uint64_t mod() const { return mod_; }
    std::size_t count() const { return count_; }
    const uint32_t* at(std::size_t i) const { return arena_.data() + i * stride_; }

    bool lookup(const uint32_t* key, std::size_t* idx) const {
        std::size_t mask = slots_.size() - 1;
        std::size_t h = hash_words(key, stride_) & mask;
        while (slots_[h]) {
            std::size_t cand = slots_[h] - 1;
            if (std::memcmp(at(cand), key, stride_ * sizeof(uint32_t)) == 0) {
                if (idx) *idx = cand;
                return true;
            }
            h = (h + 1) & mask;
        }
        return false;
    }

    // Insert if absent; true when a new element was added.
    bool insert(const uint32_t* key) {
        std::size_t mask = slots_.size() - 1;
        std::size_t h = hash_words(key, stride_) & mask;
        while (slots_[h]) {
            std::size_t cand = slots_[h] - 1;
            if (std::memcmp(at(cand), key, stride_ * sizeof(uint32_t)) == 0)
                return false;
            h = (h + 1) & mask;
        }
        if (count_ >= cap_)
            throw CapExceeded("group enumeration exceeded cap " + std::to_string(cap_));
        arena_.insert(arena_.end(), key, key + stride_);
        slots_[h] = static_cast<uint32_t>(++count_);
        if (count_ * 4 >= slots_.size() * 3) grow();
        return true;
    }

    FiniteGroup finish(std::vector<GroupElement> gens) {
        std::vector<uint32_t> order(count_);
        for (std::size_t i = 0; i < count_; ++i) order[i] = static_cast<uint32_t>(i);
        std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
            return words_less(at(a), at(b), stride_);
        });
        std::vector<uint32_t> sorted;
        sorted.reserve(arena_.size());
        for (uint32_t i : order)
            sorted.insert(sorted.end(), at(i), at(i) + stride_);
        FiniteGroup g;
        g.ell_ = ell_;
        g.prec_ = prec_;
        g.n_ = n_;
        g.mod_ = mod_;
        g.count_ = count_;
        g.gens_ = std::move(gens);
        g.arena_ = std::move(sorted);
        return g;
    }

    static FiniteGroup close(uint64_t ell, unsigned prec, unsigned n,
                             const std::vector<GroupElement>& seeds,
                             const std::vector<GroupElement>& conjugators,
                             std::size_t cap);
    static FiniteGroup wrap_sorted(uint64_t ell, unsigned prec, unsigned n,
                                   std::vector<GroupElement> gens,
                                   std::vector<uint32_t> sorted_arena);
    static FiniteGroup from_packed(uint64_t ell, unsigned prec, unsigned n,
                                   const std::vector<uint32_t>& sorted_candidates,
                                   std::size_t cap);

private:
    void grow() {
        std::vector<uint32_t> fresh(slots_.size() * 2, 0);
        std::size_t mask = fresh.size() - 1;
        for (std::size_t i = 0; i < count_; ++i) {
            std::size_t h = hash_words(at(i), stride_) & mask;
            while (fresh[h]) h = (h + 1) & mask;
            fresh[h] = static_cast<uint32_t>(i + 1);
        }
        slots_ = std::move(fresh);
    }

    uint64_t ell_;
    unsigned prec_;
    unsigned n_;
    unsigned stride_;
    std::size_t cap_;
    uint64_t mod_ = 0;
    std::size_t count_ = 0;
    std::vector<uint32_t> arena_;
    std::vector<uint32_t> slots_;
};

FiniteGroup GroupBuilder::wrap_sorted(uint64_t ell, unsigned prec, unsigned n,
                                      std::vector<GroupElement> gens,
                                      std::vector<uint32_t> sorted_arena) {
    GroupBuilder b(ell, prec, n, sorted_arena.size() / (4u * n) + 1);
    FiniteGroup g;
    g.ell_ = ell;
    g.prec_ = prec;
    g.n_ = n;
    g.mod_ = b.mod_;
    g.count_ = sorted_arena.size() / (4u * n);
    g.gens_ = std::move(gens);
    g.arena_ = std::move(sorted_arena);
    return g;
}

FiniteGroup GroupBuilder::close(uint64_t ell, unsigned prec, unsigned n,
                                const std::vector<GroupElement>& seeds,
                                const std::vector<GroupElement>& conjugators,
                                std::size_t cap) {
    GroupBuilder b(ell, prec, n, cap);
    const unsigned stride = b.stride_;
    const uint64_t mod = b.mod_;

    std::vector<uint32_t> scratch(stride), scratch2(stride);
    std::vector<uint32_t> idw(stride);
    identity_words(idw.data(), n);
    b.insert(idw.data());

    std::vector<std::vector<uint32_t>> mults;
    std::vector<std::size_t> done;
    auto adopt = [&](const uint32_t* w) {
        if (std::memcmp(w, idw.data(), stride * sizeof(uint32_t)) == 0) return;
        mults.emplace_back(w, w + stride);
        done.push_back(0);
        std::vector<uint32_t> inv(stride);
        inv_words(w, inv.data(), mod, n);
        if (std::memcmp(inv.data(), w, stride * sizeof(uint32_t)) != 0) {
            mults.push_back(std::move(inv));
            done.push_back(0);
        }
    };

    std::vector<GroupElement> record = seeds;
    for (const auto& s : seeds) {
        std::vector<uint32_t> w(stride);
        encode_element(s, w.data());
        b.insert(w.data());
        adopt(w.data());
    }

    // conjugation pairs (c, c^-1) applied in both directions
    std::vector<std::pair<std::vector<uint32_t>, std::vector<uint32_t>>> conjs;
    for (const auto& c : conjugators) {
        std::vector<uint32_t> w(stride), wi(stride);
        encode_element(c, w.data());
        if (std::memcmp(w.data(), idw.data(), stride * sizeof(uint32_t)) == 0) continue;
        inv_words(w.data(), wi.data(), mod, n);
        conjs.emplace_back(w, wi);
        if (std::memcmp(w.data(), wi.data(), stride * sizeof(uint32_t)) != 0)
            conjs.emplace_back(wi, w);
    }
    std::vector<std::size_t> cdone(conjs.size(), 0);

    // Drain multiplication watermarks before conjugating, so conjugates that
    // get adopted as fresh multipliers always enlarge a completed subgroup.
    for (;;) {
        bool moved = true;
        while (moved) {
            moved = false;
            for (std::size_t j = 0; j < mults.size(); ++j) {
                while (done[j] < b.count()) {
                    mul_words(b.at(done[j]), mults[j].data(), scratch.data(), mod, n);
                    b.insert(scratch.data());
                    ++done[j];
                    moved = true;
                }
            }
        }
        bool adopted = false;
        for (std::size_t k = 0; k < conjs.size() && !adopted; ++k) {
            while (cdone[k] < b.count()) {
                mul_words(conjs[k].first.data(), b.at(cdone[k]), scratch.data(), mod, n);
                mul_words(scratch.data(), conjs[k].second.data(), scratch2.data(), mod, n);
                ++cdone[k];
                if (b.insert(scratch2.data())) {
                    adopt(scratch2.data());
                    record.push_back(decode_element(scratch2.data(), ell, prec, n));
                    adopted = true;
                    break;
                }
            }
        }
        if (!adopted) {
            bool all = true;
            for (std::size_t j = 0; j < mults.size(); ++j)
                if (done[j] < b.count()) { all = false; break; }
            for (std::size_t k = 0; k < conjs.size(); ++k)
                if (cdone[k] < b.count()) { all = false; break; }
            if (all) break;
        }
    }
    return b.finish(std::move(record));
}

FiniteGroup GroupBuilder::from_packed(uint64_t ell, unsigned prec, unsigned n,
                                      const std::vector<uint32_t>& cand,
                                      std::size_t cap) {
    const unsigned stride = 4u * n;
    const std::size_t total = cand.size() / stride;
    if (total > cap)
        throw CapExceeded("element list exceeds cap " + std::to_string(cap));
    auto member = [&](const uint32_t* key) {
        std::size_t lo = 0, hi = total;
        while (lo < hi) {
            std::size_t mid = (lo + hi) / 2;
            const uint32_t* p = cand.data() + mid * stride;
            int c = std::memcmp(p, key, stride * sizeof(uint32_t));
            if (c == 0) return true;
            if (words_less(p, key, stride)) lo = mid + 1; else hi = mid;
        }
        return false;
    };

    GroupBuilder b(ell, prec, n, cap);
    const uint64_t mod = b.mod_;
    std::vector<uint32_t> idw(stride), scratch(stride);
    identity_words(idw.data(), n);
    if (!member(idw.data()))
        throw PreconditionError("from_elements: identity is missing");
    b.insert(idw.data());

    std::vector<GroupElement> gens;
    std::vector<std::vector<uint32_t>> mults;
    std::vector<std::size_t> done;
    for (std::size_t i = 0; i < total; ++i) {
        const uint32_t* x = cand.data() + i * stride;
        if (b.lookup(x, nullptr)) continue;
        gens.push_back(decode_element(x, ell, prec, n));
        mults.emplace_back(x, x + stride);
        done.push_back(0);
        std::vector<uint32_t> inv(stride);
        inv_words(x, inv.data(), mod, n);
        if (std::memcmp(inv.data(), x, stride * sizeof(uint32_t)) != 0) {
            mults.push_back(std::move(inv));
            done.push_back(0);
        }
        b.insert(x);
        bool moved = true;
        while (moved) {
            moved = false;
            for (std::size_t j = 0; j < mults.size(); ++j) {
                while (done[j] < b.count()) {
                    mul_words(b.at(done[j]), mults[j].data(), scratch.data(), mod, n);
                    if (b.insert(scratch.data()) && !member(scratch.data()))
                        throw PreconditionError(
                            "from_elements: set is not closed under the group operations");
                    ++done[j];
                    moved = true;
                }
            }
        }
    }
    if (b.count() != total)
        throw PreconditionError("from_elements: set is not closed under the group operations");
    return b.finish(std::move(gens));
}

FiniteGroup FiniteGroup::closure(const std::vector<GroupElement>& generators,
                                 std::size_t cap) {
    check_shared_frame(generators, "closure");
    FiniteGroup g = GroupBuilder::close(generators[0].ell(), generators[0].precision(),
                                        generators[0].n(), generators, {}, cap);
    g.gens_ = generators;
    return g;
}

FiniteGroup FiniteGroup::normal_closure(const std::vector<GroupElement>& seeds,
                                        const std::vector<GroupElement>& conjugators,
                                        std::size_t cap) {
    check_shared_frame(conjugators, "normal_closure");
    uint64_t ell = conjugators[0].ell();
    unsigned prec = conjugators[0].precision(), n = conjugators[0].n();
    if (!seeds.empty()) {
        check_shared_frame(seeds, "normal_closure");
        if (seeds[0].ell() != ell || seeds[0].precision() != prec || seeds[0].n() != n)
            throw DomainError("normal_closure: seed/conjugator parameter mismatch");
    }
    return GroupBuilder::close(ell, prec, n, seeds, conjugators, cap);
}

FiniteGroup FiniteGroup::from_elements(const std::vector<GroupElement>& elements,
                                       std::size_t cap) {
    check_shared_frame(elements, "from_elements");
    uint64_t ell = elements[0].ell();
    unsigned prec = elements[0].precision(), n = elements[0].n();
    const unsigned stride = 4u * n;
    std::vector<uint32_t> packed(elements.size() * stride);
    for (std::size_t i = 0; i < elements.size(); ++i)
        encode_element(elements[i], packed.data() + i * stride);
    std::vector<uint32_t> order(elements.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<uint32_t>(i);
    std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
        return words_less(packed.data() + a * stride, packed.data() + b * stride, stride);
    });
    std::vector<uint32_t> sorted;
    sorted.reserve(packed.size());
    for (uint32_t i : order) {
        const uint32_t* p = packed.data() + i * stride;
        if (!sorted.empty() &&
            std::memcmp(sorted.data() + sorted.size() - stride, p,
                        stride * sizeof(uint32_t)) == 0)
            continue;
        sorted.insert(sorted.end(), p, p + stride);
    }
    return GroupBuilder::from_packed(ell, prec, n, sorted, cap);
}

FiniteGroup FiniteGroup::trivial(uint64_t ell, unsigned prec, unsigned n) {
    GroupBuilder b(ell, prec, n, 1);
    std::vector<uint32_t> idw(4u * n);
    identity_words(idw.data(), n);
    b.insert(idw.data());
    return b.finish({});
}

GroupElement FiniteGroup::element(std::size_t idx) const {
    if (idx >= count_) throw DomainError("FiniteGroup::element: index out of range");
    return decode_element(arena_.data() + idx * 4u * n_, ell_, prec_, n_);
}

bool FiniteGroup::contains(const GroupElement& g) const {
    if (g.ell() != ell_ || g.precision() != prec_ || g.n() != n_)
        throw DomainError("FiniteGroup::contains: parameter mismatch");
    const unsigned stride = 4u * n_;
    std::vector<uint32_t> key(stride);
    encode_element(g, key.data());
    std::size_t lo = 0, hi = count_;
    while (lo < hi) {
        std::size_t mid = (lo + hi) / 2;
        const uint32_t* p = arena_.data() + mid * stride;
        int c = std::memcmp(p, key.data(), stride * sizeof(uint32_t));
        if (c == 0) return true;
        if (words_less(p, key.data(), stride)) lo = mid + 1; else hi = mid;
    }
    return false;
}

bool FiniteGroup::contains_all(const FiniteGroup& other) const {
    if (other.ell_ != ell_ || other.prec_ != prec_ || other.n_ != n_)
        throw DomainError("FiniteGroup::contains_all: parameter mismatch");
    if (other.count_ > count_) return false;
    const unsigned stride = 4u * n_;
    std::size_t i = 0;
    for (std::size_t j = 0; j < other.count_; ++j) {
        const uint32_t* key = other.arena_.data() + j * stride;
        while (i < count_ && words_less(arena_.data() + i * stride, key, stride)) ++i;
        if (i == count_ ||
            std::memcmp(arena_.data() + i * stride, key, stride * sizeof(uint32_t)) != 0)
            return false;
    }
    return true;
}

bool FiniteGroup::operator==(const FiniteGroup& o) const {
    return ell_ == o.ell_ && prec_ == o.prec_ && n_ == o.n_ && arena_ == o.arena_;
}

uint64_t full_sl2_order(uint64_t ell, unsigned m) {
    if (m == 0) throw DomainError("full_sl2_order: m >= 1");
    uint64_t r = ell * ell - 1;
    for (unsigned i = 0; i < 3 * m - 2; ++i) {
        if (r > UINT64_MAX / ell) throw DomainError("full_sl2_order: overflow");
        r *= ell;
    }
    return r;
}

std::size_t group_index(const FiniteGroup& G, const FiniteGroup& H) {
    if (!G.contains_all(H))
        throw PreconditionError("group_index: H is not a subgroup of G");
    if (G.order() % H.order() != 0)
        throw LemmaViolation("group_index: Lagrange divisibility failed");
    return G.order() / H.order();
}

GroupElement gen_tuple(char kind, unsigned slot, unsigned n, const PadicScalar& a) {
    if (slot >= n) throw DomainError("gen_tuple: slot out of range");
    std::vector<Mat2> parts;
    parts.reserve(n);
    for (unsigned f = 0; f < n; ++f) {
        if (f != slot) {
            parts.push_back(Mat2::identity(a.ell(), a.precision()));
        } else if (kind == 'L') {
            parts.push_back(gen_L(a));
        } else if (kind == 'R') {
            parts.push_back(gen_R(a));
        } else if (kind == 'D') {
            parts.push_back(gen_D(a));
        } else {
            throw DomainError("gen_tuple: kind must be L, R or D");
        }
    }
    return GroupElement(std::move(parts));
}

std::vector<GroupElement> ball_generators(uint64_t ell, unsigned m,
                                          const std::vector<unsigned>& levels) {
    if (levels.empty()) throw DomainError("ball_generators: no factors");
    const unsigned n = static_cast<unsigned>(levels.size());
    std::vector<GroupElement> out;
    for (unsigned j = 0; j < n; ++j) {
        unsigned s = levels[j];
        if (s == 0 && ell < 5)
            throw DomainError("ball_generators: level 0 needs l >= 5");
        if (s == 1 && ell == 2)
            throw DomainError("ball_generators: level 1 at l = 2 is outside the lemma");
        if (s == 0) {
            PadicScalar one(ell, m, 1);
            out.push_back(gen_tuple('L', j, n, one));
            out.push_back(gen_tuple('R', j, n, one));
        } else {
            PadicScalar step = PadicScalar::from_residue(
                ell, m, powmod_u64(ell, s, pow_u64(ell, m)));
            out.push_back(gen_tuple('L', j, n, step));
            out.push_back(gen_tuple('R', j, n, step));
            out.push_back(gen_tuple('D', j, n, step));
        }
    }
    return out;
}

FiniteGroup comm_subgroup(const std::vector<GroupElement>& gens_a,
                          const std::vector<GroupElement>& gens_b,
                          std::size_t cap) {
    check_shared_frame(gens_a, "comm_subgroup");
    check_shared_frame(gens_b, "comm_subgroup");
    std::vector<GroupElement> seeds;
    for (const auto& a : gens_a)
        for (const auto& b : gens_b) {
            GroupElement c = comm(a, b);
            if (!c.is_identity()) seeds.push_back(c);
        }
    return FiniteGroup::normal_closure(seeds, concat(gens_a, gens_b), cap);
}

FiniteGroup derived_subgroup(const FiniteGroup& G, std::size_t cap) {
    if (G.generators().empty()) return FiniteGroup::trivial(G.ell(), G.precision(), G.factors());
    return comm_subgroup(G.generators(), G.generators(), cap);
}

GroupElement reduced_element(const GroupElement& g, unsigned k) {
    if (k == 0 || k > g.precision())
        throw DomainError("reduced_element: bad target precision");
    uint64_t q = pow_u64(g.ell(), k);
    std::vector<Mat2> parts;
    for (unsigned f = 0; f < g.n(); ++f) {
        const Mat2& m = g.factor(f);
        parts.push_back(Mat2::from_residues(g.ell(), k,
            {m.at(0).residue() % q, m.at(1).residue() % q,
             m.at(2).residue() % q, m.at(3).residue() % q}));
    }
    return GroupElement(std::move(parts));
}

FiniteGroup reduction_image(const FiniteGroup& G, unsigned k) {
    if (k == 0 || k > G.precision())
        throw DomainError("reduction_image: bad target precision");
    if (k == G.precision()) return G;
    const unsigned stride = 4u * G.factors();
    const uint64_t q = pow_u64(G.ell(), k);
    std::vector<uint32_t> red(G.packed().size());
    for (std::size_t i = 0; i < red.size(); ++i)
        red[i] = static_cast<uint32_t>(G.packed()[i] % q);
    std::vector<uint32_t> order(G.order());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<uint32_t>(i);
    std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
        return words_less(red.data() + a * stride, red.data() + b * stride, stride);
    });
    std::vector<uint32_t> sorted;
    for (uint32_t i : order) {
        const uint32_t* p = red.data() + i * stride;
        if (!sorted.empty() &&
            std::memcmp(sorted.data() + sorted.size() - stride, p,
                        stride * sizeof(uint32_t)) == 0)
            continue;
        sorted.insert(sorted.end(), p, p + stride);
    }
    std::vector<GroupElement> gens;
    for (const auto& g : G.generators()) gens.push_back(reduced_element(g, k));
    return GroupBuilder::wrap_sorted(G.ell(), k, G.factors(), std::move(gens),
                                     std::move(sorted));
}

FiniteGroup reduction_kernel(const FiniteGroup& G, unsigned k) {
    if (k == 0 || k > G.precision())
        throw DomainError("reduction_kernel: bad target precision");
    const unsigned stride = 4u * G.factors();
    const uint64_t q = pow_u64(G.ell(), k);
    std::vector<uint32_t> keep;
    for (std::size_t i = 0; i < G.order(); ++i) {
        const uint32_t* p = G.packed().data() + i * stride;
        if (is_identity_words_mod(p, q, G.factors()))
            keep.insert(keep.end(), p, p + stride);
    }
    return GroupBuilder::from_packed(G.ell(), G.precision(), G.factors(), keep,
                                     G.order() + 1);
}

FiniteGroup project(const FiniteGroup& G, const std::vector<unsigned>& slots) {
    if (slots.empty()) throw DomainError("project: no slots");
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (slots[i] >= G.factors()) throw DomainError("project: slot out of range");
        if (i > 0 && slots[i] <= slots[i - 1])
            throw DomainError("project: slots must be strictly increasing");
    }
    const unsigned stride = 4u * G.factors();
    const unsigned ostride = 4u * static_cast<unsigned>(slots.size());
    std::vector<uint32_t> proj(G.order() * ostride);
    for (std::size_t i = 0; i < G.order(); ++i) {
        const uint32_t* p = G.packed().data() + i * stride;
        uint32_t* q = proj.data() + i * ostride;
        for (std::size_t s = 0; s < slots.size(); ++s)
            std::memcpy(q + 4 * s, p + 4 * slots[s], 4 * sizeof(uint32_t));
    }
    std::vector<uint32_t> order(G.order());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<uint32_t>(i);
    std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
        return words_less(proj.data() + a * ostride, proj.data() + b * ostride, ostride);
    });
    std::vector<uint32_t> sorted;
    for (uint32_t i : order) {
        const uint32_t* p = proj.data() + i * ostride;
        if (!sorted.empty() &&
            std::memcmp(sorted.data() + sorted.size() - ostride, p,
                        ostride * sizeof(uint32_t)) == 0)
            continue;
        sorted.insert(sorted.end(), p, p + ostride);
    }
    std::vector<GroupElement> gens;
    for (const auto& g : G.generators()) {
        std::vector<Mat2> parts;
        for (unsigned s : slots) parts.push_back(g.factor(s));
        gens.push_back(GroupElement(std::move(parts)));
    }
    return GroupBuilder::wrap_sorted(G.ell(), G.precision(),
                                     static_cast<unsigned>(slots.size()),
                                     std::move(gens), std::move(sorted));
}

FiniteGroup subgroup_where(const FiniteGroup& G,
                           const std::function<bool(const GroupElement&)>& pred) {
    const unsigned stride = 4u * G.factors();
    std::vector<uint32_t> keep;
    for (std::size_t i = 0; i < G.order(); ++i) {
        if (pred(G.element(i))) {
            const uint32_t* p = G.packed().data() + i * stride;
            keep.insert(keep.end(), p, p + stride);
        }
    }
    if (keep.empty())
        throw PreconditionError("subgroup_where: predicate rejected the identity");
    return GroupBuilder::from_packed(G.ell(), G.precision(), G.factors(), keep,
                                     G.order() + 1);
}

bool contains_ball(const FiniteGroup& G, const std::vector<unsigned>& levels) {
    if (levels.size() != G.factors())
        throw DomainError("contains_ball: one level per factor required");
    const uint64_t ell = G.ell();
    const unsigned m = G.precision();
    for (unsigned j = 0; j < G.factors(); ++j) {
        unsigned s = levels[j];
        if (s >= m) continue; // the ball is trivial at this precision
        if (s == 0) {
            if (ell < 5)
                throw DomainError("contains_ball: level 0 needs l >= 5");
            FiniteGroup img = reduction_image(project(G, {j}), 1);
            if (img.order() != full_sl2_order(ell, 1)) return false;
            continue;
        }
        if (ell == 2 && s == 1)
            throw DomainError("contains_ball: level 1 at l = 2 is outside the lemma");
        PadicScalar step = PadicScalar::from_residue(ell, m, powmod_u64(ell, s, G.modulus()));
        for (char kind : {'L', 'R', 'D'})
            if (!G.contains(gen_tuple(kind, j, G.factors(), step)))
                return false;
    }
    return true;
}

std::optional<GroupElement> graph_defect(const FiniteGroup& G, unsigned t) {
    if (G.factors() != 2)
        throw PreconditionError("graph_defect: needs exactly two factors");
    if (t == 0 || t > G.precision())
        throw DomainError("graph_defect: level must be in [1, m]");
    const unsigned stride = 4u * 2;
    const uint64_t q = pow_u64(G.ell(), t);
    for (std::size_t i = 0; i < G.order(); ++i) {
        const uint32_t* p = G.packed().data() + i * stride;
        bool id0 = is_identity_words_mod(p, q, 1);
        bool id1 = is_identity_words_mod(p + 4, q, 1);
        if (id0 != id1) return G.element(i);
    }
    return std::nullopt;
}

bool EnumeratedOracle::pair_contains_ball(unsigned i, unsigned j, unsigned s) const {
    if (i == j || i >= factors() || j >= factors())
        throw DomainError("pair_contains_ball: bad slot pair");
    if (i > j) std::swap(i, j);
    FiniteGroup pair = project(G_, {i, j});
    return contains_ball(pair, {s, s});
}

std::string EnumeratedOracle::describe() const {
    std::ostringstream os;
    os << "enumerated group, order " << G_.order() << ", l=" << G_.ell()
       << " m=" << G_.precision() << " n=" << G_.factors();
    return os.str();
}

BallProductOracle::BallProductOracle(uint64_t ell, unsigned prec,
                                     std::vector<unsigned> levels)
    : ell_(ell), prec_(prec), levels_(std::move(levels)) {
    if (levels_.empty()) throw DomainError("BallProductOracle: no factors");
    for (unsigned s : levels_) {
        if (s == 0 && ell_ < 5)
            throw DomainError("BallProductOracle: level 0 needs l >= 5");
        if (s == 1 && ell_ == 2)
            throw DomainError("BallProductOracle: level 1 at l = 2 is outside the lemma");
    }
}

bool BallProductOracle::contains(const GroupElement& g) const {
    if (g.ell() != ell_ || g.precision() != prec_ || g.n() != levels_.size())
        throw DomainError("BallProductOracle::contains: parameter mismatch");
    PadicScalar one(ell_, prec_, 1);
    for (unsigned f = 0; f < g.n(); ++f) {
        if (g.factor(f).det() != one) return false;
        unsigned s = levels_[f];
        if (s > 0 && !g.factor(f).congruent_identity(std::min(s, prec_)))
            return false;
    }
    return true;
}

bool BallProductOracle::pair_contains_ball(unsigned i, unsigned j, unsigned s) const {
    if (i == j || i >= factors() || j >= factors())
        throw DomainError("pair_contains_ball: bad slot pair");
    return s >= levels_[i] && s >= levels_[j];
}

std::string BallProductOracle::describe() const {
    std::ostringstream os;
    os << "ball product, l=" << ell_ << " m=" << prec_ << " levels (";
    for (std::size_t i = 0; i < levels_.size(); ++i)
        os << (i ? "," : "") << levels_[i];
    os << ")";
    return os.str();
}

std::string GoursatReport::str() const {
    std::ostringstream os;
    os << "goursat: l=" << ell << " m=" << precision << " n=" << factors
       << " -> " << (verified ? "verified" : "failed") << "; conclusion levels (";
    for (std::size_t i = 0; i < conclusion.size(); ++i)
        os << (i ? "," : "") << conclusion[i];
    os << ")\n";
    for (const auto& line : log) os << "  " << line << "\n";
    return os.str();
}

namespace {

// A pair witness: some group element whose slot i is the requested standard
// generator and whose slot j is Id.  The canonical all-identity embedding is
// tried first; an enumerated oracle falls back to scanning.
GroupElement pick_pair_witness(const GroupOracle& G, char kind, unsigned i,
                               unsigned j, unsigned s) {
    const uint64_t mod = pow_u64(G.ell(), G.precision());
    PadicScalar step = PadicScalar::from_residue(G.ell(), G.precision(),
                                                 powmod_u64(G.ell(), s, mod));
    GroupElement cand = gen_tuple(kind, i, G.factors(), step);
    if (G.contains(cand)) return cand;
    if (const auto* en = dynamic_cast<const EnumeratedOracle*>(&G)) {
        Mat2 want = kind == 'L' ? gen_L(step) : kind == 'R' ? gen_R(step) : gen_D(step);
        const FiniteGroup& H = en->group();
        for (std::size_t idx = 0; idx < H.order(); ++idx) {
            GroupElement g = H.element(idx);
            if (g.factor(i) == want && g.factor(j).congruent_identity(G.precision())) return g;
        }
    }
    throw HypothesisUnmet("goursat: no reachable witness for pair (" +
                          std::to_string(i) + "," + std::to_string(j) + ")");
}

struct Chain {
    GroupElement elt;
    PadicScalar value; // slot-i parameter: gen_<kind>(value)
};

// Iterated commutator over the given partner list.  Starts from a kind-type
// witness against partners[0], then absorbs a D-type witness per remaining
// partner; each step forces Id into that partner's slot and multiplies the
// slot-i parameter by w(2+w)/(1+w)^2 (L) or -w(2+w) (R).
Chain build_chain(const GroupOracle& G, char kind, unsigned i,
                  const std::vector<unsigned>& partners,
                  const std::vector<std::vector<unsigned>>& s) {
    const uint64_t ell = G.ell();
    const unsigned m = G.precision();
    const uint64_t mod = pow_u64(ell, m);
    PadicScalar one(ell, m, 1), two(ell, m, 2);
    PadicScalar val = PadicScalar::from_residue(ell, m,
        powmod_u64(ell, s[i][partners[0]], mod));
    GroupElement w = pick_pair_witness(G, kind, i, partners[0], s[i][partners[0]]);
    for (std::size_t k = 1; k < partners.size(); ++k) {
        unsigned j = partners[k];
        GroupElement x = pick_pair_witness(G, 'D', i, j, s[i][j]);
        w = comm(w, x);
        PadicScalar wk = PadicScalar::from_residue(ell, m, powmod_u64(ell, s[i][j], mod));
        if (kind == 'L') {
            PadicScalar inv = (one + wk).inverse();
            val = val * wk * (two + wk) * inv * inv;
        } else {
            val = -(val * wk * (two + wk));
        }
        Mat2 want = kind == 'L' ? gen_L(val) : gen_R(val);
        if (w.factor(i) != want)
            throw LemmaViolation("goursat: commutator identity failed in chain");
        for (std::size_t kk = 0; kk <= k; ++kk)
            if (!w.factor(partners[kk]).congruent_identity(G.precision()))
                throw LemmaViolation("goursat: partner slot not cleared in chain");
    }
    if (!G.contains(w))
        throw LemmaViolation("goursat: chain witness rejected by the group");
    return {w, val};
}

// Unit-correct a chain so slot i carries exactly gen_<kind>(l^t).
GroupElement straighten(const GroupOracle& G, char kind, unsigned i,
                        const Chain& c, unsigned t) {
    const uint64_t ell = G.ell();
    const unsigned m = G.precision();
    if (c.value.valuation() != t)
        throw LemmaViolation("goursat: chain value has the wrong depth");
    uint64_t k = c.value.shifted_down(t).inverse().residue();
    GroupElement w = group_pow(c.elt, static_cast<int64_t>(k));
    PadicScalar step = PadicScalar::from_residue(ell, m, powmod_u64(ell, t, pow_u64(ell, m)));
    if (w != gen_tuple(kind, i, G.factors(), step))
        throw LemmaViolation("goursat: unit correction failed");
    if (!G.contains(w))
        throw LemmaViolation("goursat: corrected witness rejected by the group");
    return w;
}

} // namespace

GoursatReport goursat_combine(const GroupOracle& G,
                              const std::vector<std::vector<unsigned>>& s) {
    const unsigned n = G.factors();
    const uint64_t ell = G.ell();
    const unsigned m = G.precision();
    const unsigned v = (ell == 2) ? 1u : 0u;
    if (n < 2) throw PreconditionError("goursat_combine: needs n >= 2");
    if (s.size() != n) throw PreconditionError("goursat_combine: level matrix must be n x n");
    for (unsigned i = 0; i < n; ++i) {
        if (s[i].size() != n)
            throw PreconditionError("goursat_combine: level matrix must be n x n");
        for (unsigned j = 0; j < n; ++j) {
            if (i == j) continue;
            if (s[i][j] != s[j][i])
                throw PreconditionError("goursat_combine: level matrix must be symmetric");
            if (s[i][j] < 1 + v)
                throw DomainError("goursat_combine: pair levels must be >= 1 (>= 2 at l=2)");
        }
    }

    GoursatReport rep;
    rep.ell = ell;
    rep.precision = m;
    rep.factors = n;
    rep.pair_levels = s;

    for (unsigned i = 0; i < n; ++i)
        for (unsigned j = i + 1; j < n; ++j)
            if (!G.pair_contains_ball(i, j, s[i][j]))
                throw HypothesisUnmet("goursat: pair (" + std::to_string(i) + "," +
                                      std::to_string(j) + ") lacks B(" +
                                      std::to_string(s[i][j]) + "," +
                                      std::to_string(s[i][j]) + ")");

    for (unsigned i = 0; i < n; ++i) {
        unsigned t = (n - 2) * v;
        for (unsigned j = 0; j < n; ++j)
            if (j != i) t += s[i][j];
        rep.conclusion.push_back(t);
    }

    if (n == 2) {
        const uint64_t mod = pow_u64(ell, m);
        for (unsigned i = 0; i < 2; ++i) {
            PadicScalar step = PadicScalar::from_residue(ell, m,
                powmod_u64(ell, rep.conclusion[i], mod));
            for (char kind : {'L', 'R', 'D'})
                if (!G.contains(gen_tuple(kind, i, 2, step)))
                    throw LemmaViolation("goursat: embedded generator missing at n=2");
            rep.log.push_back("slot " + std::to_string(i) + ": level " +
                              std::to_string(rep.conclusion[i]) + " generators confirmed");
        }
        rep.verified = true;
        return rep;
    }

    PadicScalar one(ell, m, 1), two(ell, m, 2);
    for (unsigned i = 0; i < n; ++i) {
        unsigned t = rep.conclusion[i];
        if (t >= m) {
            rep.log.push_back("slot " + std::to_string(i) +
                              ": level >= precision, ball is trivial mod l^m");
            continue;
        }
        std::vector<unsigned> partners;
        for (unsigned j = 0; j < n; ++j)
            if (j != i) partners.push_back(j);

        Chain lchain = build_chain(G, 'L', i, partners, s);
        GroupElement Lwit = straighten(G, 'L', i, lchain, t);
        Chain rchain = build_chain(G, 'R', i, partners, s);
        GroupElement Rwit = straighten(G, 'R', i, rchain, t);

        // D-type witness: split the partners, build one L-arm and one R-arm,
        // take the cross commutator and complete it to a diagonal by flanking
        // with already-certified L and R elements.
        std::vector<unsigned> armA(partners.begin(), partners.begin() + 1);
        std::vector<unsigned> armB(partners.begin() + 1, partners.end());
        Chain larm = build_chain(G, 'L', i, armA, s);
        Chain rarm = build_chain(G, 'R', i, armB, s);
        PadicScalar c = rarm.value, d = larm.value;
        GroupElement Kelt = comm(rarm.elt, larm.elt);
        if (Kelt.factor(i) != comm(gen_R(c), gen_L(d)))
            throw LemmaViolation("goursat: cross commutator identity failed");
        for (unsigned j : partners)
            if (!Kelt.factor(j).congruent_identity(G.precision()))
                throw LemmaViolation("goursat: cross commutator left a partner slot dirty");
        if (!G.contains(Kelt))
            throw LemmaViolation("goursat: cross commutator rejected by the group");

        PadicScalar cd = c * d;
        PadicScalar k11 = (one + cd) * (one + cd) - cd;
        PadicScalar x = -(c * d * d * k11.inverse());
        PadicScalar y = c * c * d * k11.inverse();
        GroupElement lx = group_pow(Lwit, static_cast<int64_t>(x.shifted_down(t).residue()));
        GroupElement ry = group_pow(Rwit, static_cast<int64_t>(y.shifted_down(t).residue()));
        GroupElement Dcand = lx * Kelt * ry;
        PadicScalar delta = cd * (one + cd);
        if (Dcand.factor(i) != gen_D(delta))
            throw LemmaViolation("goursat: diagonal completion failed");
        if (!G.contains(Dcand))
            throw LemmaViolation("goursat: diagonal witness rejected by the group");
        if (ell == 2) {
            Dcand = Dcand * Dcand;
            delta = delta * (two + delta);
        }
        if (delta.valuation() != t)
            throw LemmaViolation("goursat: diagonal witness has the wrong depth");
        PadicScalar target = PadicScalar::from_residue(ell, m,
            powmod_u64(ell, t, pow_u64(ell, m)));
        PadicScalar kpow = log_unit(one + target).shifted_down(t) *
                           log_unit(one + delta).shifted_down(t).inverse();
        GroupElement Dwit = group_pow(Dcand, static_cast<int64_t>(kpow.residue()));
        if (Dwit != gen_tuple('D', i, n, target))
            throw LemmaViolation("goursat: diagonal unit correction failed");
        if (!G.contains(Dwit))
            throw LemmaViolation("goursat: corrected diagonal rejected by the group");

        rep.log.push_back("slot " + std::to_string(i) + ": L, R, D generators at level " +
                          std::to_string(t) + " certified by commutator witnesses");
    }

    if (const auto* en = dynamic_cast<const EnumeratedOracle*>(&G)) {
        if (!contains_ball(en->group(), rep.conclusion))
            throw LemmaViolation("goursat: final ball containment check failed");
        rep.log.push_back("enumerated cross-check: contains_ball(conclusion) holds");
    }
    rep.verified = true;
    return rep;
}

GoursatReport goursat_combine(const FiniteGroup& G,
                              const std::vector<std::vector<unsigned>>& s) {
    EnumeratedOracle oracle(G);
    return goursat_combine(oracle, s);
}

} // namespace pinkforge
