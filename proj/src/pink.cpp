#include "pinkforge/pink.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>

#include "pinkforge/dickson.hpp"
#include "pinkforge/errors.hpp"

namespace pinkforge {

namespace {

constexpr uint64_t kScalarCap = uint64_t{1} << 61;

template <typename T>
std::string join_list(const std::vector<T>& xs) {
    if (xs.empty()) return "none";
    std::ostringstream os;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) os << ",";
        os << xs[i];
    }
    return os.str();
}

Mat2 neg_identity_mat(uint64_t ell, unsigned prec) {
    const uint64_t mod = ipow_checked(ell, prec, kScalarCap);
    return Mat2::from_residues(ell, prec, {mod - 1, 0, 0, mod - 1});
}

bool is_scalar_pm(const Mat2& x) {
    return x == Mat2::identity(x.ell(), x.precision()) ||
           x == neg_identity_mat(x.ell(), x.precision());
}

unsigned mat2_order(const Mat2& x) {
    const Mat2 id = Mat2::identity(x.ell(), x.precision());
    Mat2 y = x;
    unsigned ord = 1;
    while (!(y == id)) {
        y = y * x;
        ++ord;
        if (ord > 2000000)
            throw NonConvergence("mat2_order: no period below 2e6");
    }
    return ord;
}

unsigned prime_to_ell_part(unsigned ord, uint64_t ell) {
    while (ord % ell == 0) ord /= static_cast<unsigned>(ell);
    return ord;
}

// An element with one side scalar mod l and the other of prime-to-l order
// at least 3, if the mod-l image holds one.
std::optional<GroupElement> find_easy_element(const FiniteGroup& gbar) {
    for (std::size_t i = 0; i < gbar.order(); ++i) {
        const GroupElement g = gbar.element(i);
        const Mat2 a = g.factor(0);
        const Mat2 b = g.factor(1);
        const bool sa = is_scalar_pm(a);
        const bool sb = is_scalar_pm(b);
        if (sa == sb) continue;
        if (prime_to_ell_part(mat2_order(sa ? b : a), gbar.ell()) >= 3)
            return g;
    }
    return std::nullopt;
}

// Index-2 subgroup of a Cartan normalizer with Cartan label.  Every index-2
// subgroup contains the group generated by all squares (the quotient by it
// has exponent 2), so the candidates are that group or its extensions by a
// single coset; among the Cartan-labeled ones, the lex-least arena wins.
FiniteGroup cartan_index2_part(const FiniteGroup& nbar) {
    std::vector<GroupElement> squares;
    squares.reserve(nbar.order());
    for (std::size_t i = 0; i < nbar.order(); ++i) {
        const GroupElement x = nbar.element(i);
        squares.push_back(x * x);
    }
    const FiniteGroup M = FiniteGroup::closure(squares);
    const std::size_t q = group_index(nbar, M);
    std::vector<FiniteGroup> halves;
    if (q == 2) {
        halves.push_back(M);
    } else if (q == 4) {
        std::vector<GroupElement> reps;
        for (std::size_t i = 0; i < nbar.order() && reps.size() < 3; ++i) {
            const GroupElement x = nbar.element(i);
            if (M.contains(x)) continue;
            bool seen = false;
            for (const GroupElement& r : reps)
                if (M.contains(r.inverse() * x)) { seen = true; break; }
            if (!seen) reps.push_back(x);
        }
        for (const GroupElement& r : reps) {
            std::vector<GroupElement> elems;
            elems.reserve(2 * M.order());
            for (std::size_t i = 0; i < M.order(); ++i) {
                elems.push_back(M.element(i));
                elems.push_back(r * M.element(i));
            }
            halves.push_back(FiniteGroup::from_elements(elems));
        }
    } else {
        throw ConstructionFailed("normalizer descent: square quotient of order " +
                                 std::to_string(q));
    }
    const FiniteGroup* best = nullptr;
    for (const FiniteGroup& h : halves) {
        const DicksonLabel lab = classify(h).label;
        if (lab != DicksonLabel::SplitCartan && lab != DicksonLabel::NonsplitCartan)
            continue;
        if (best == nullptr || h.packed() < best->packed()) best = &h;
    }
    if (best == nullptr)
        throw ConstructionFailed("normalizer descent: no Cartan half above the squares");
    return *best;
}

// Exceptional mod-l groups contain -Id (the unique involution), hence hold a
// cyclic subgroup of order 6 or 10 whose index divides 24.
FiniteGroup exceptional_cyclic_part(const FiniteGroup& ebar) {
    for (std::size_t i = 0; i < ebar.order(); ++i) {
        const GroupElement x = ebar.element(i);
        const unsigned ord = mat2_order(x.factor(0));
        if (ord != 6 && ord != 10) continue;
        const FiniteGroup c = FiniteGroup::closure({x});
        if (24 % group_index(ebar, c) == 0) return c;
    }
    throw ConstructionFailed(
        "exceptional descent: no order 6 or 10 element of small index");
}

std::array<uint64_t, 4> coset_key(const Mat2& x, const FiniteGroup& nsub) {
    std::array<uint64_t, 4> best{~uint64_t{0}, ~uint64_t{0}, ~uint64_t{0},
                                 ~uint64_t{0}};
    for (std::size_t i = 0; i < nsub.order(); ++i)
        best = std::min(best, (x * nsub.element(i).factor(0)).residues());
    return best;
}

// Does the two-factor mod-l group define a bijection between the N-quotients
// of its projections?  Returns a description of the first defect found.
std::optional<std::string> nquotient_graph_defect(const FiniteGroup& kbar,
                                                  const FiniteGroup& n1,
                                                  const FiniteGroup& n2) {
    std::map<std::array<uint64_t, 4>, std::array<uint64_t, 4>> fwd, bwd;
    for (std::size_t i = 0; i < kbar.order(); ++i) {
        const GroupElement g = kbar.element(i);
        const std::array<uint64_t, 4> k1 = coset_key(g.factor(0), n1);
        const std::array<uint64_t, 4> k2 = coset_key(g.factor(1), n2);
        const auto f = fwd.emplace(k1, k2);
        if (!f.second && f.first->second != k2)
            return "left coset with two right images at " + g.str();
        const auto b = bwd.emplace(k2, k1);
        if (!b.second && b.first->second != k1)
            return "right coset with two left images at " + g.str();
    }
    return std::nullopt;
}

std::optional<std::string> scalar_pair_defect(const FiniteGroup& tbar) {
    for (std::size_t i = 0; i < tbar.order(); ++i) {
        const GroupElement g = tbar.element(i);
        const Mat2 a = g.factor(0);
        const Mat2 b = g.factor(1);
        if (is_scalar_pm(a) && is_scalar_pm(b) && !(a == b))
            return "crossed scalar pair at " + g.str();
    }
    return std::nullopt;
}

std::optional<unsigned> least_uniform_ball(const FiniteGroup& G) {
    const unsigned lo = (G.ell() == 2) ? 2 : 1;
    for (unsigned s = lo; s < G.precision(); ++s)
        if (contains_ball(G, std::vector<unsigned>(G.factors(), s))) return s;
    return std::nullopt;
}

PadicScalar det_rec(const std::vector<std::vector<PadicScalar>>& a,
                    const std::vector<unsigned>& cols, unsigned row) {
    if (cols.size() == 1) return a[row][cols[0]];
    std::optional<PadicScalar> acc;
    for (std::size_t t = 0; t < cols.size(); ++t) {
        std::vector<unsigned> rest;
        rest.reserve(cols.size() - 1);
        for (std::size_t u = 0; u < cols.size(); ++u)
            if (u != t) rest.push_back(cols[u]);
        PadicScalar term = a[row][cols[t]] * det_rec(a, rest, row + 1);
        if (t % 2 == 1) term = -term;
        acc = acc ? *acc + term : term;
    }
    return *acc;
}

} // namespace

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Verified: return "Verified";
        case Verdict::InconclusiveAtPrecision: return "InconclusiveAtPrecision";
        case Verdict::LemmaViolation: return "LemmaViolation";
    }
    return "?";
}

ModLattice lie_algebra(const FiniteGroup& G) {
    const uint64_t l = G.ell();
    const unsigned m = G.precision();
    const unsigned n = G.factors();
    unsigned lat_prec = m;
    if (l == 2) {
        if (m < 2) throw DomainError("lie_algebra: l = 2 needs precision >= 2");
        if (reduction_image(G, 2).order() != 1)
            throw DomainError("lie_algebra: l = 2 needs G trivial mod 4");
        lat_prec = m - 1;
    }
    ModLattice acc = ModLattice::zero_lattice(l, lat_prec, 3 * n);
    std::vector<std::vector<uint64_t>> rows;
    rows.reserve(2048);
    for (std::size_t i = 0; i < G.order(); ++i) {
        const std::vector<PadicScalar> t = theta_tuple(G.element(i));
        std::vector<uint64_t> row(t.size());
        for (std::size_t j = 0; j < t.size(); ++j) row[j] = t[j].residue();
        rows.push_back(std::move(row));
        if (rows.size() == 2048) {
            acc = acc.sum(ModLattice::span(l, lat_prec, 3 * n, rows));
            rows.clear();
        }
    }
    if (!rows.empty()) acc = acc.sum(ModLattice::span(l, lat_prec, 3 * n, rows));
    return acc;
}

std::optional<unsigned> least_scaled_basis_level(const ModLattice& L) {
    for (unsigned k = 0; k < L.precision(); ++k)
        if (L.contains_scaled_basis(k)) return k;
    return std::nullopt;
}

ModLattice trace_form_module(const ModLattice& L) {
    if (L.dim() % 3 != 0)
        throw DomainError("trace_form_module: dimension must be a multiple of 3");
    const unsigned n = L.dim() / 3;
    const uint64_t mod = L.modulus();
    const std::vector<std::vector<uint64_t>>& b = L.basis();
    std::vector<std::vector<uint64_t>> rows;
    for (std::size_t s = 0; s < b.size(); ++s)
        for (std::size_t t = s; t < b.size(); ++t) {
            std::vector<uint64_t> row(n);
            for (unsigned i = 0; i < n; ++i) {
                const uint64_t x = b[s][3 * i], h = b[s][3 * i + 1],
                               y = b[s][3 * i + 2];
                const uint64_t xp = b[t][3 * i], hp = b[t][3 * i + 1],
                               yp = b[t][3 * i + 2];
                uint64_t v = mulmod_u64(2 % mod, mulmod_u64(h, hp, mod), mod);
                v = (v + mulmod_u64(x, yp, mod)) % mod;
                v = (v + mulmod_u64(xp, y, mod)) % mod;
                row[i] = v;
            }
            rows.push_back(std::move(row));
        }
    return ModLattice::span(L.ell(), L.precision(), n, rows);
}

std::string PinkReport::str() const {
    std::ostringstream os;
    os << "input=" << input << "\n"
       << "verdict=" << verdict_name(verdict) << "\n"
       << "k_found=" << (k_found ? std::to_string(*k_found) : std::string("none"))
       << "\n"
       << "conclusion_checked=" << join_list(conclusion_checked) << "\n"
       << "subgroup_indices=" << join_list(subgroup_indices) << "\n"
       << "lie=" << lie_algebra.str() << "\n";
    if (!detail.empty()) os << "detail=" << detail << "\n";
    return os.str();
}

PinkReport pink_proell_check(const FiniteGroup& G, unsigned k) {
    const uint64_t l = G.ell();
    const unsigned m = G.precision();
    const unsigned n = G.factors();
    if (l == 2) throw DomainError("pink_proell_check: l must be odd");
    if (reduction_image(G, 1).order() != 1)
        throw PreconditionError("pink_proell_check: G must be trivial mod l");

    PinkReport rep(lie_algebra(G));
    std::ostringstream in;
    in << "pro-l check: l=" << l << " m=" << m << " n=" << n << " |G|=" << G.order()
       << " k=" << k;
    rep.input = in.str();
    rep.k_found = least_scaled_basis_level(rep.lie_algebra);

    if (2 * k >= m) {
        rep.detail = "claimed level " + std::to_string(2 * k) +
                     " is not below the precision";
        return rep;
    }
    if (!rep.lie_algebra.contains_scaled_basis(k))
        throw HypothesisUnmet("pink_proell_check: the algebra misses l^" +
                              std::to_string(k) + " sl2^n");

    // the algebra must pair to 2 l^2k in every coordinate of the trace module
    const ModLattice tr = trace_form_module(rep.lie_algebra);
    const uint64_t mod = tr.modulus();
    const uint64_t l2k = ipow_checked(l, 2 * k, kScalarCap);
    for (unsigned i = 0; i < n; ++i) {
        std::vector<uint64_t> v(n, 0);
        v[i] = mulmod_u64(2 % mod, l2k % mod, mod);
        if (!tr.contains(v)) {
            rep.verdict = Verdict::LemmaViolation;
            rep.detail = "trace module misses 2 l^" + std::to_string(2 * k) +
                         " in coordinate " + std::to_string(i);
            return rep;
        }
    }

    const FiniteGroup D = derived_subgroup(G);
    const std::vector<unsigned> levels(n, 2 * k);
    if (!contains_ball(D, levels)) {
        rep.verdict = Verdict::LemmaViolation;
        rep.detail = "derived subgroup misses a generator of the level-" +
                     std::to_string(2 * k) + " ball";
        return rep;
    }
    rep.conclusion_checked = levels;
    rep.verdict = Verdict::Verified;
    rep.detail = "derived subgroup contains the level-" + std::to_string(2 * k) +
                 " ball in every factor";
    return rep;
}

bool approx_eigen_check(const std::vector<std::vector<PadicScalar>>& g,
                        const PadicScalar& lambda,
                        const std::vector<PadicScalar>& w,
                        unsigned nlevel, unsigned alpha) {
    const std::size_t d = g.size();
    if (d == 0 || d > 6)
        throw DomainError("approx_eigen_check: dimension must be between 1 and 6");
    for (const std::vector<PadicScalar>& row : g)
        if (row.size() != d)
            throw DomainError("approx_eigen_check: matrix must be square");
    if (w.size() != d)
        throw DomainError("approx_eigen_check: vector length must match");
    const unsigned m = lambda.precision();
    if (!(alpha < nlevel && nlevel <= m))
        throw PreconditionError("approx_eigen_check: need alpha < nlevel <= m");

    unsigned wmin = m;
    for (const PadicScalar& c : w) wmin = std::min(wmin, c.valuation());
    if (wmin > alpha)
        throw PreconditionError(
            "approx_eigen_check: w vanishes mod l^{alpha+1}");

    for (std::size_t i = 0; i < d; ++i) {
        std::optional<PadicScalar> dot;
        for (std::size_t j = 0; j < d; ++j) {
            const PadicScalar t = g[i][j] * w[j];
            dot = dot ? *dot + t : t;
        }
        if ((*dot - lambda * w[i]).valuation() < nlevel)
            throw PreconditionError(
                "approx_eigen_check: g w differs from lambda w below l^nlevel");
    }

    std::vector<std::vector<PadicScalar>> a;
    a.reserve(d);
    for (std::size_t i = 0; i < d; ++i) {
        std::vector<PadicScalar> row;
        row.reserve(d);
        for (std::size_t j = 0; j < d; ++j) {
            PadicScalar v = -g[i][j];
            if (i == j) v = v + lambda;
            row.push_back(v);
        }
        a.push_back(std::move(row));
    }
    std::vector<unsigned> cols(d);
    std::iota(cols.begin(), cols.end(), 0u);
    return det_rec(a, cols, 0).valuation() + alpha >= nlevel;
}

FiniteGroup sylow_preimage_T(const FiniteGroup& G) {
    const uint64_t l = G.ell();
    const unsigned n = G.factors();
    const FiniteGroup gbar = reduction_image(G, 1);

    // mod l, the l-elements are exactly those killed by the exponent l
    std::vector<GroupElement> lelts;
    for (std::size_t i = 0; i < gbar.order(); ++i) {
        const GroupElement x = gbar.element(i);
        if (!x.is_identity() && group_pow(x, static_cast<int64_t>(l)).is_identity())
            lelts.push_back(x);
    }

    FiniteGroup syl = FiniteGroup::trivial(l, 1, n);
    if (!lelts.empty()) {
        syl = FiniteGroup::closure({lelts.front()});
        // grow by l-elements normalizing the current group; any maximal
        // l-subgroup reached this way is a Sylow subgroup
        bool grew = true;
        while (grew) {
            grew = false;
            for (const GroupElement& y : lelts) {
                if (syl.contains(y)) continue;
                bool normalizes = true;
                for (const GroupElement& p : syl.generators())
                    if (!syl.contains(y * p * y.inverse())) {
                        normalizes = false;
                        break;
                    }
                if (!normalizes) continue;
                std::vector<GroupElement> gens = syl.generators();
                gens.push_back(y);
                syl = FiniteGroup::closure(gens);
                grew = true;
                break;
            }
        }
        std::size_t w = syl.order();
        while (w % l == 0) w /= l;
        if (w != 1)
            throw LemmaViolation("sylow_preimage_T: growth left the l-group family");
    }

    const FiniteGroup& s = syl;
    FiniteGroup T = subgroup_where(G, [&](const GroupElement& g) {
        return s.contains(reduced_element(g, 1));
    });
    const std::size_t idx = group_index(G, T);
    const uint64_t per = l * l - 1;
    uint64_t x = idx;
    for (unsigned i = 0; i < n && x > 1; ++i) x /= std::gcd(x, per);
    if (x != 1)
        throw LemmaViolation("sylow_preimage_T: index " + std::to_string(idx) +
                             " does not divide (l^2 - 1)^" + std::to_string(n));
    return T;
}

std::string FirstReductionReport::str() const {
    std::ostringstream os;
    os << "case=" << case_found << "\n"
       << "verdict=" << verdict_name(verdict) << "\n"
       << "index=" << index << "\n"
       << "index_chain=" << join_list(index_chain) << "\n";
    if (easy_witness) os << "easy_witness=" << easy_witness->str() << "\n";
    if (case_found == 1) os << "checked_level=" << checked_level << "\n";
    if (T) os << "T_order=" << T->order() << "\n";
    if (!detail.empty()) os << "detail=" << detail << "\n";
    return os.str();
}

FirstReductionReport first_reduction(const FiniteGroup& G, unsigned n1, unsigned n2) {
    const uint64_t l = G.ell();
    const unsigned m = G.precision();
    if (G.factors() != 2)
        throw PreconditionError("first_reduction: needs exactly two factors");
    if (l <= 5)
        throw PreconditionError("first_reduction: needs l > 5");
    if (n1 == 0 || n2 == 0 || n1 >= m || n2 >= m)
        throw PreconditionError("first_reduction: ball levels must lie in [1, m)");
    if (!contains_ball(project(G, {0}), {n1}) ||
        !contains_ball(project(G, {1}), {n2}))
        throw HypothesisUnmet("first_reduction: a projection misses its ball");

    FirstReductionReport rep;
    std::ostringstream det;
    const FiniteGroup gbar = reduction_image(G, 1);

    if (std::optional<GroupElement> e = find_easy_element(gbar)) {
        rep.case_found = 1;
        rep.easy_witness = e;
        const unsigned target = 20 * std::max(n1, n2);
        const FiniteGroup D = derived_subgroup(G);
        for (unsigned s = 1; s < m; ++s)
            if (contains_ball(D, {s, s})) {
                rep.checked_level = s;
                break;
            }
        det << "easy element " << e->str() << "; claimed level " << target;
        if (target < m) {
            if (rep.checked_level >= 1 && rep.checked_level <= target) {
                rep.verdict = Verdict::Verified;
            } else {
                rep.verdict = Verdict::LemmaViolation;
                det << "; derived subgroup misses the level-" << target << " ball";
            }
        } else {
            rep.verdict = Verdict::InconclusiveAtPrecision;
            if (rep.checked_level) det << "; checked level " << rep.checked_level;
        }
        rep.detail = det.str();
        return rep;
    }

    // H: force the first projection mod l into Cartan/Borel/full shape
    const FiniteGroup g1bar = project(gbar, {0});
    const SubgroupType ty1 = classify(g1bar);
    FiniteGroup H = G;
    std::size_t idx_gh = 1;
    if (ty1.label == DicksonLabel::NormalizerSplitCartan ||
        ty1.label == DicksonLabel::NormalizerNonsplitCartan) {
        const FiniteGroup half = cartan_index2_part(g1bar);
        H = subgroup_where(G, [&](const GroupElement& g) {
            return half.contains(GroupElement({reduced_element(g, 1).factor(0)}));
        });
        idx_gh = group_index(G, H);
    } else if (ty1.label == DicksonLabel::Exceptional) {
        const FiniteGroup cyc = exceptional_cyclic_part(g1bar);
        H = subgroup_where(G, [&](const GroupElement& g) {
            return cyc.contains(GroupElement({reduced_element(g, 1).factor(0)}));
        });
        idx_gh = group_index(G, H);
    }
    if (24 % idx_gh != 0)
        throw ConstructionFailed("first_reduction: [G:H] = " +
                                 std::to_string(idx_gh) + " does not divide 24");
    det << "first projection " << ty1.str() << ", [G:H] = " << idx_gh << "; ";

    // K: remove crossed signs
    const FiniteGroup hbar = reduction_image(H, 1);
    const Mat2 id1 = Mat2::identity(l, 1);
    const Mat2 nid1 = neg_identity_mat(l, 1);
    const GroupElement cross_a(std::vector<Mat2>{nid1, id1});
    const GroupElement cross_b(std::vector<Mat2>{id1, nid1});
    FiniteGroup K = H;
    std::size_t idx_hk = 1;
    if (hbar.contains(cross_a) || hbar.contains(cross_b)) {
        const FiniteGroup h1bar = project(hbar, {0});
        const FiniteGroup h2bar = project(hbar, {1});
        const DicksonLabel lab1 = classify(h1bar).label;
        const DicksonLabel lab2 = classify(h2bar).label;
        FiniteGroup kbar = hbar;
        if (lab1 == DicksonLabel::Full || lab2 == DicksonLabel::Full) {
            if (lab1 != DicksonLabel::Full || lab2 != DicksonLabel::Full)
                throw ConstructionFailed(
                    "first_reduction: one projection full, the other not");
            // the sign character of the twisted graph dies on commutators,
            // and SL2(F_l) is perfect, so the derived group is its kernel
            kbar = derived_subgroup(hbar);
        } else {
            const FiniteGroup nn1 = max_normal_proell(h1bar);
            const FiniteGroup nn2 = max_normal_proell(h2bar);
            // kernel of H(l) -> Hbar/2Hbar: generated by squares together
            // with everything mapping into N1 x N2
            std::vector<GroupElement> seeds;
            for (std::size_t i = 0; i < hbar.order(); ++i) {
                const GroupElement x = hbar.element(i);
                seeds.push_back(x * x);
                if (nn1.contains(GroupElement({x.factor(0)})) &&
                    nn2.contains(GroupElement({x.factor(1)})))
                    seeds.push_back(x);
            }
            kbar = FiniteGroup::closure(seeds);
        }
        if (kbar.contains(cross_a) || kbar.contains(cross_b))
            throw ConstructionFailed(
                "first_reduction: a crossed sign survives the kernel");
        K = subgroup_where(H, [&](const GroupElement& g) {
            return kbar.contains(reduced_element(g, 1));
        });
        idx_hk = group_index(H, K);
        if (4 % idx_hk != 0)
            throw ConstructionFailed("first_reduction: [H:K] = " +
                                     std::to_string(idx_hk) + " does not divide 4");
    }
    det << "[H:K] = " << idx_hk << "; ";

    // T: keep K when the N-quotients are large, else drop to the pro-l kernel
    const FiniteGroup kbar = reduction_image(K, 1);
    const FiniteGroup k1bar = project(kbar, {0});
    const FiniteGroup k2bar = project(kbar, {1});
    const DicksonLabel labk1 = classify(k1bar).label;
    const DicksonLabel labk2 = classify(k2bar).label;
    const auto allowed = [](DicksonLabel lab) {
        return lab == DicksonLabel::SplitCartan ||
               lab == DicksonLabel::NonsplitCartan || lab == DicksonLabel::Borel ||
               lab == DicksonLabel::Full;
    };
    if (!allowed(labk1) || !allowed(labk2))
        throw ConstructionFailed("first_reduction: projection shapes " +
                                 label_name(labk1) + ", " + label_name(labk2) +
                                 " after descent");
    const FiniteGroup nk1 = max_normal_proell(k1bar);
    const FiniteGroup nk2 = max_normal_proell(k2bar);
    if (std::optional<std::string> defect = nquotient_graph_defect(kbar, nk1, nk2))
        throw ConstructionFailed("first_reduction: quotient graph broken: " + *defect);
    const std::size_t q1 = k1bar.order() / nk1.order();
    const std::size_t q2 = k2bar.order() / nk2.order();
    det << "shapes " << label_name(labk1) << "/" << label_name(labk2)
        << ", quotient orders " << q1 << "/" << q2;

    if (8 % q1 != 0 && 8 % q2 != 0) {
        rep.case_found = 3;
        rep.index_chain = {idx_gh, idx_hk, 1};
        rep.index = idx_gh * idx_hk;
        if (192 % rep.index != 0)
            throw ConstructionFailed("first_reduction: [G:T] = " +
                                     std::to_string(rep.index) +
                                     " does not divide 4 * 48");
        if (group_index(G, K) != rep.index)
            throw ConstructionFailed("first_reduction: index bookkeeping mismatch");
        if (!contains_ball(project(K, {0}), {n1}) ||
            !contains_ball(project(K, {1}), {n2}))
            throw ConstructionFailed("first_reduction: T lost a per-factor ball");
        if (std::optional<std::string> bad = scalar_pair_defect(kbar))
            throw ConstructionFailed("first_reduction: " + *bad);
        rep.T = K;
        rep.verdict = Verdict::Verified;
        rep.detail = det.str();
        return rep;
    }

    if (q1 != q2)
        throw ConstructionFailed(
            "first_reduction: graph holds but quotient orders differ");
    const FiniteGroup& nfirst = nk1;
    FiniteGroup T = subgroup_where(K, [&](const GroupElement& g) {
        return nfirst.contains(GroupElement({reduced_element(g, 1).factor(0)}));
    });
    const std::size_t idx_kt = group_index(K, T);
    if (8 % idx_kt != 0)
        throw ConstructionFailed("first_reduction: [K:T] = " +
                                 std::to_string(idx_kt) + " does not divide 8");
    const FiniteGroup tbar = reduction_image(T, 1);
    std::size_t w = tbar.order();
    while (w % l == 0) w /= l;
    if (w != 1)
        throw ConstructionFailed("first_reduction: the kernel image is not an l-group");
    if (std::optional<std::string> bad = scalar_pair_defect(tbar))
        throw ConstructionFailed("first_reduction: " + *bad);
    if (!contains_ball(project(T, {0}), {n1}) ||
        !contains_ball(project(T, {1}), {n2}))
        throw ConstructionFailed("first_reduction: T lost a per-factor ball");
    rep.case_found = 2;
    rep.index_chain = {idx_gh, idx_hk, idx_kt};
    rep.index = idx_gh * idx_hk * idx_kt;
    if (2304 % rep.index != 0)
        throw ConstructionFailed("first_reduction: [G:T] = " +
                                 std::to_string(rep.index) +
                                 " does not divide 48^2");
    if (group_index(G, T) != rep.index)
        throw ConstructionFailed("first_reduction: index bookkeeping mismatch");
    rep.T = std::move(T);
    rep.verdict = Verdict::Verified;
    rep.detail = det.str();
    return rep;
}

PinkReport main_theorem_harness(const FiniteGroup& G, unsigned k) {
    const uint64_t l = G.ell();
    const unsigned m = G.precision();
    const unsigned n = G.factors();
    const unsigned claimed = 80 * (std::max(n, 2u) - 1) * k;
    const unsigned lat_prec = (l == 2) ? std::max(m, 2u) - 1 : m;

    PinkReport rep(ModLattice::zero_lattice(l, lat_prec, 3 * n));
    std::ostringstream in;
    in << "main theorem: l=" << l << " m=" << m << " n=" << n << " |G|=" << G.order()
       << " k=" << k << " claimed level " << claimed;
    rep.input = in.str();
    std::ostringstream det;

    if (l == 2 && m < 3) {
        rep.detail = "precision too small for the l = 2 reduction";
        return rep;
    }

    FiniteGroup T = G;
    if (l > 5 && n == 2) {
        const std::optional<unsigned> b1 = least_uniform_ball(project(G, {0}));
        const std::optional<unsigned> b2 = least_uniform_ball(project(G, {1}));
        if (!b1 || !b2) {
            rep.detail = "a projection holds no ball below the precision";
            return rep;
        }
        const FirstReductionReport fr = first_reduction(G, *b1, *b2);
        rep.subgroup_indices.push_back(fr.index);
        det << "trichotomy case " << fr.case_found << "; ";
        if (fr.case_found == 1) {
            rep.lie_algebra = lie_algebra(G);
            rep.k_found = least_scaled_basis_level(rep.lie_algebra);
            if (fr.checked_level >= 1) {
                rep.conclusion_checked.assign(n, fr.checked_level);
                det << "derived subgroup verified at level " << fr.checked_level;
            } else {
                det << "no derived-subgroup ball below the precision";
            }
            bool ok = claimed < m && fr.checked_level >= 1 &&
                      fr.checked_level <= claimed;
            rep.verdict = ok ? Verdict::Verified : Verdict::InconclusiveAtPrecision;
            rep.detail = det.str();
            return rep;
        }
        T = *fr.T;
    } else {
        T = sylow_preimage_T(G);
        rep.subgroup_indices.push_back(group_index(G, T));
        det << "sylow preimage; ";
    }

    const FiniteGroup P = reduction_kernel(T, (l == 2) ? 2 : 1);
    rep.subgroup_indices.push_back(group_index(T, P));
    rep.lie_algebra = lie_algebra(P);
    rep.k_found = least_scaled_basis_level(rep.lie_algebra);
    det << "pro-l core of order " << P.order() << "; ";

    if (k >= lat_prec) {
        rep.detail = det.str() + "hypothesis level k at or above the precision";
        return rep;
    }
    if (!rep.lie_algebra.contains_scaled_basis(k))
        throw HypothesisUnmet("main_theorem_harness: the core algebra misses l^" +
                              std::to_string(k) + " sl2^n");

    const FiniteGroup D = derived_subgroup(P);
    const unsigned s_lo = (l == 2) ? 2 : 1;
    unsigned vstar = 0;
    for (unsigned s = s_lo; s < m; ++s)
        if (contains_ball(D, std::vector<unsigned>(n, s))) {
            vstar = s;
            break;
        }

    if (l != 2 && rep.k_found) {
        const unsigned kk = *rep.k_found;
        if (2 * kk < m &&
            !contains_ball(D, std::vector<unsigned>(n, 2 * kk))) {
            rep.verdict = Verdict::LemmaViolation;
            rep.detail = det.str() + "core derived subgroup misses the level-" +
                         std::to_string(2 * kk) + " ball";
            return rep;
        }
    }

    std::vector<unsigned> conf(n, 0);
    if (vstar) {
        conf.assign(n, vstar);
        det << "core derived ball at level " << vstar << "; ";
    }
    if (n >= 2) {
        std::vector<std::vector<unsigned>> s(n, std::vector<unsigned>(n, 0));
        bool have_pairs = true;
        for (unsigned i = 0; i < n && have_pairs; ++i)
            for (unsigned j = i + 1; j < n; ++j) {
                const FiniteGroup pair = project(D, {i, j});
                unsigned sij = 0;
                for (unsigned lev = s_lo; lev < m; ++lev)
                    if (contains_ball(pair, {lev, lev})) {
                        sij = lev;
                        break;
                    }
                if (sij == 0) {
                    have_pairs = false;
                    break;
                }
                s[i][j] = s[j][i] = sij;
            }
        if (have_pairs) {
            const GoursatReport gr = goursat_combine(D, s);
            if (!gr.verified) {
                rep.verdict = Verdict::LemmaViolation;
                rep.detail = det.str() + "a recombination witness was rejected";
                return rep;
            }
            det << "recombined levels " << join_list(gr.conclusion) << "; ";
            for (unsigned i = 0; i < n; ++i) {
                if (gr.conclusion[i] >= m) continue;
                conf[i] = conf[i] ? std::min(conf[i], gr.conclusion[i])
                                  : gr.conclusion[i];
            }
        }
    }

    bool all_set = true;
    for (unsigned c : conf) all_set = all_set && c > 0;
    if (all_set) rep.conclusion_checked = conf;

    bool ok = claimed < m && all_set;
    for (unsigned i = 0; ok && i < n; ++i) ok = conf[i] <= claimed;
    rep.verdict = ok ? Verdict::Verified : Verdict::InconclusiveAtPrecision;
    rep.detail = det.str();
    return rep;
}

FiniteGroup example_graph_group(unsigned n1, unsigned p, unsigned m) {
    if (!(3 <= n1 && n1 < p && p < m))
        throw PreconditionError("example_graph_group: need 3 <= n1 < p < m");
    if (m >= 31) throw DomainError("example_graph_group: precision too large");
    const unsigned bits = 3 * (m - n1) + 3 * (m - p);
    if (bits > 24)
        throw CapExceeded("example_graph_group: order 2^" + std::to_string(bits) +
                          " exceeds the group cap");
    std::vector<GroupElement> gens = ball_generators(2, m, {p, p});
    for (const GroupElement& g : ball_generators(2, m, {n1}))
        gens.push_back(GroupElement(std::vector<Mat2>{g.factor(0), g.factor(0)}));
    FiniteGroup G = FiniteGroup::closure(gens);
    if (G.order() != (uint64_t{1} << bits))
        throw LemmaViolation("example_graph_group: order " +
                             std::to_string(G.order()) + " is not 2^" +
                             std::to_string(bits));
    return G;
}

bool graph_group_conjugation_identities(unsigned n1, unsigned m) {
    if (n1 < 1 || 3 * n1 + 2 >= m || m >= 61)
        throw PreconditionError(
            "graph_group_conjugation_identities: need 3 n1 + 2 < m < 61");
    const Mat2 N = Mat2::from_residues(2, m, {uint64_t{1} << (n1 + 1), 0, 0, 1});
    const Mat2 r_big = gen_R(2, m, int64_t{1} << (2 * n1 + 1));
    const Mat2 r_small = gen_R(2, m, int64_t{1} << n1);
    const Mat2 l_big = gen_L(2, m, int64_t{1} << (2 * n1 + 1));
    const Mat2 l_deep = gen_L(2, m, int64_t{1} << (3 * n1 + 2));
    return r_big * N == N * r_small && l_big * N == N * l_deep;
}

} // namespace pinkforge
