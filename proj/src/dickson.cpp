#include "pinkforge/dickson.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <vector>

#include "pinkforge/errors.hpp"
#include "pinkforge/mat2.hpp"

namespace pinkforge {

namespace {

constexpr uint64_t kEllLimit = 50;

// F_{l^2} = F_l[t]/(t^2 - s t - c), elements u + v t.  s = 0 and c a
// non-residue for odd l; t^2 = t + 1 for l = 2.
struct Fq {
    uint64_t u = 0, v = 0;
    bool is_zero() const { return u == 0 && v == 0; }
};

class QuadExt {
public:
    explicit QuadExt(uint64_t ell) : ell_(ell) {
        if (ell == 2) {
            s_ = 1;
            c_ = 1;
            return;
        }
        std::vector<bool> sq(ell, false);
        for (uint64_t x = 0; x < ell; ++x) sq[x * x % ell] = true;
        c_ = 2;
        while (sq[c_]) ++c_;
    }

    uint64_t ell() const { return ell_; }

    Fq add(Fq a, Fq b) const { return {(a.u + b.u) % ell_, (a.v + b.v) % ell_}; }
    Fq sub(Fq a, Fq b) const {
        return {(a.u + ell_ - b.u) % ell_, (a.v + ell_ - b.v) % ell_};
    }
    Fq mul(Fq a, Fq b) const {
        uint64_t vv = a.v * b.v % ell_;
        return {(a.u * b.u + c_ * vv) % ell_,
                (a.u * b.v + a.v * b.u + s_ * vv) % ell_};
    }
    Fq scale(uint64_t k, Fq a) const { return {k % ell_ * a.u % ell_, k % ell_ * a.v % ell_}; }
    Fq frob(Fq a) const { return {(a.u + s_ * a.v) % ell_, (ell_ - a.v) % ell_}; }

private:
    uint64_t ell_;
    uint64_t s_ = 0;
    uint64_t c_;
};

// [x : y] over F_{l^2}; lines through the origin, compared by cross product.
struct Point {
    Fq x, y;
};

using Quad = std::array<uint64_t, 4>;

Point apply(const QuadExt& F, const Quad& h, const Point& p) {
    return {F.add(F.scale(h[0], p.x), F.scale(h[1], p.y)),
            F.add(F.scale(h[2], p.x), F.scale(h[3], p.y))};
}

bool parallel(const QuadExt& F, const Point& p, const Point& q) {
    return F.sub(F.mul(p.x, q.y), F.mul(q.x, p.y)).is_zero();
}

bool sends(const QuadExt& F, const Quad& h, const Point& p, const Point& q) {
    return parallel(F, apply(F, h, p), q);
}

bool is_scalar(const Quad& h, uint64_t ell) {
    return h[1] == 0 && h[2] == 0 && h[0] == h[3] &&
           (h[0] == 1 || h[0] == ell - 1);
}

Quad quad_mul(const Quad& a, const Quad& b, uint64_t ell) {
    return {(a[0] * b[0] + a[1] * b[2]) % ell, (a[0] * b[1] + a[1] * b[3]) % ell,
            (a[2] * b[0] + a[3] * b[2]) % ell, (a[2] * b[1] + a[3] * b[3]) % ell};
}

void check_frame(const FiniteGroup& H, const char* who) {
    if (H.factors() != 1)
        throw PreconditionError(std::string(who) + ": needs a single factor");
    if (H.precision() != 1)
        throw PreconditionError(std::string(who) + ": needs precision m = 1");
}

struct Shape {
    bool full = false;
    unsigned rational_fixed = 0;
    bool nonrational_fixed = false;
    bool rational_pair = false;
    bool conjugate_pair = false;
    ExceptionalKind exceptional = ExceptionalKind::None;
};

ExceptionalKind projective_image_kind(const std::vector<Quad>& els, uint64_t ell) {
    std::size_t scalars = 0;
    for (const Quad& h : els)
        if (is_scalar(h, ell)) ++scalars;
    std::size_t proj = els.size() / scalars;
    if (proj != 12 && proj != 24 && proj != 60) return ExceptionalKind::None;
    std::map<std::size_t, std::size_t> count;
    for (const Quad& h : els) {
        Quad w = h;
        std::size_t k = 1;
        while (!is_scalar(w, ell)) {
            w = quad_mul(w, h, ell);
            ++k;
        }
        count[k] += 1;
    }
    auto matches = [&](std::map<std::size_t, std::size_t> table) {
        for (auto& [ord, n] : table) n *= scalars;
        return count == table;
    };
    if (proj == 12 && matches({{1, 1}, {2, 3}, {3, 8}})) return ExceptionalKind::A4;
    if (proj == 24 && matches({{1, 1}, {2, 9}, {3, 8}, {4, 6}}))
        return ExceptionalKind::S4;
    if (proj == 60 && matches({{1, 1}, {2, 15}, {3, 20}, {5, 24}}))
        return ExceptionalKind::A5;
    return ExceptionalKind::None;
}

Shape analyze(const FiniteGroup& H) {
    const uint64_t ell = H.ell();
    QuadExt F(ell);

    std::vector<Quad> els;
    els.reserve(H.order());
    for (std::size_t i = 0; i < H.order(); ++i)
        els.push_back(H.element(i).factor(0).residues());

    auto fixed_by_all = [&](const Point& p) {
        for (const Quad& h : els)
            if (!sends(F, h, p, p)) return false;
        return true;
    };
    auto pair_kept_by_all = [&](const Point& p, const Point& q) {
        for (const Quad& h : els) {
            if (sends(F, h, p, p) && sends(F, h, q, q)) continue;
            if (sends(F, h, p, q) && sends(F, h, q, p)) continue;
            return false;
        }
        return true;
    };

    std::vector<Point> rational;
    rational.push_back({Fq{1, 0}, Fq{0, 0}});
    for (uint64_t x = 0; x < ell; ++x) rational.push_back({Fq{x, 0}, Fq{1, 0}});

    Shape sh;
    sh.full = H.order() == full_sl2_order(ell, 1);

    for (const Point& p : rational)
        if (fixed_by_all(p)) ++sh.rational_fixed;

    // One representative per Frobenius orbit outside P1(F_l).
    std::vector<Point> nonrational;
    for (uint64_t v = 1; v < ell; ++v)
        for (uint64_t u = 0; u < ell; ++u) {
            Fq z{u, v};
            Fq zb = F.frob(z);
            if (z.u + z.v * ell <= zb.u + zb.v * ell)
                nonrational.push_back({z, Fq{1, 0}});
        }

    for (const Point& p : nonrational)
        if (fixed_by_all(p)) {
            sh.nonrational_fixed = true;
            break;
        }

    for (std::size_t i = 0; i < rational.size() && !sh.rational_pair; ++i)
        for (std::size_t j = i + 1; j < rational.size(); ++j)
            if (pair_kept_by_all(rational[i], rational[j])) {
                sh.rational_pair = true;
                break;
            }

    for (const Point& p : nonrational)
        if (pair_kept_by_all(p, {F.frob(p.x), p.y})) {
            sh.conjugate_pair = true;
            break;
        }

    if (!sh.full) sh.exceptional = projective_image_kind(els, ell);
    return sh;
}

Shape checked_shape(const FiniteGroup& H, const char* who) {
    check_frame(H, who);
    if (H.ell() > kEllLimit)
        throw PreconditionError(std::string(who) + ": l > 50 is out of scope");
    return analyze(H);
}

} // namespace

std::string label_name(DicksonLabel label) {
    switch (label) {
        case DicksonLabel::SplitCartan: return "SplitCartan";
        case DicksonLabel::NonsplitCartan: return "NonsplitCartan";
        case DicksonLabel::Borel: return "Borel";
        case DicksonLabel::NormalizerSplitCartan: return "NormalizerSplitCartan";
        case DicksonLabel::NormalizerNonsplitCartan:
            return "NormalizerNonsplitCartan";
        case DicksonLabel::Exceptional: return "Exceptional";
        case DicksonLabel::Full: return "Full";
    }
    return "?";
}

std::string SubgroupType::str() const {
    if (label != DicksonLabel::Exceptional) return label_name(label);
    switch (kind) {
        case ExceptionalKind::A4: return "Exceptional(A4)";
        case ExceptionalKind::S4: return "Exceptional(S4)";
        case ExceptionalKind::A5: return "Exceptional(A5)";
        case ExceptionalKind::None: break;
    }
    return "Exceptional(?)";
}

SubgroupType classify(const FiniteGroup& H) {
    Shape sh = checked_shape(H, "classify");
    if (sh.full) return {DicksonLabel::Full};
    if (sh.rational_fixed >= 2) return {DicksonLabel::SplitCartan};
    if (sh.nonrational_fixed) return {DicksonLabel::NonsplitCartan};
    if (sh.rational_fixed == 1) return {DicksonLabel::Borel};
    if (sh.rational_pair) return {DicksonLabel::NormalizerSplitCartan};
    if (sh.conjugate_pair) return {DicksonLabel::NormalizerNonsplitCartan};
    if (sh.exceptional != ExceptionalKind::None)
        return {DicksonLabel::Exceptional, sh.exceptional};
    throw UnclassifiableError("classify: subgroup of order " +
                              std::to_string(H.order()) + " at l = " +
                              std::to_string(H.ell()) + " fits no shape");
}

std::vector<DicksonLabel> type_set(const FiniteGroup& H) {
    Shape sh = checked_shape(H, "type_set");
    std::vector<DicksonLabel> out;
    if (sh.rational_fixed >= 2) out.push_back(DicksonLabel::SplitCartan);
    if (sh.nonrational_fixed) out.push_back(DicksonLabel::NonsplitCartan);
    if (sh.rational_fixed >= 1) out.push_back(DicksonLabel::Borel);
    if (sh.rational_pair) out.push_back(DicksonLabel::NormalizerSplitCartan);
    if (sh.conjugate_pair) out.push_back(DicksonLabel::NormalizerNonsplitCartan);
    if (sh.exceptional != ExceptionalKind::None)
        out.push_back(DicksonLabel::Exceptional);
    if (sh.full) out.push_back(DicksonLabel::Full);
    return out;
}

bool is_borel_type(const FiniteGroup& H) {
    return classify(H).label == DicksonLabel::Borel;
}

FiniteGroup ell_sylow(const FiniteGroup& H) {
    check_frame(H, "ell_sylow");
    const Mat2 id = Mat2::identity(H.ell(), 1);
    std::vector<GroupElement> sel;
    for (std::size_t i = 0; i < H.order(); ++i) {
        GroupElement g = H.element(i);
        if (mat_pow(g.factor(0), static_cast<int64_t>(H.ell())) == id)
            sel.push_back(g);
    }
    try {
        return FiniteGroup::from_elements(sel);
    } catch (const PreconditionError&) {
        throw NotNormalSylow("ell_sylow: elements of l-power order do not form "
                             "a subgroup (order " + std::to_string(H.order()) +
                             ", l = " + std::to_string(H.ell()) + ")");
    }
}

FiniteGroup max_normal_proell(const FiniteGroup& G) {
    FiniteGroup gbar = reduction_image(G, 1);
    std::vector<FiniteGroup> slot_core;
    for (unsigned i = 0; i < G.factors(); ++i) {
        FiniteGroup gi = project(gbar, {i});
        if (classify(gi).label == DicksonLabel::Borel)
            slot_core.push_back(ell_sylow(gi));
        else
            slot_core.push_back(FiniteGroup::trivial(G.ell(), 1, 1));
    }
    auto pred = [&](const GroupElement& g) {
        GroupElement r = reduced_element(g, 1);
        for (unsigned i = 0; i < r.n(); ++i)
            if (!slot_core[i].contains(GroupElement({r.factor(i)}))) return false;
        return true;
    };
    return subgroup_where(G, pred);
}

} // namespace pinkforge
