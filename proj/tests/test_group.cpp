#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "pinkforge/errors.hpp"
#include "pinkforge/group.hpp"

using namespace pinkforge;

namespace {

GroupElement elt1(uint64_t l, unsigned m, std::array<uint64_t, 4> r) {
    return GroupElement({Mat2::from_residues(l, m, r)});
}

FiniteGroup sl2_f(uint64_t l) {
    return FiniteGroup::closure(ball_generators(l, 1, {0}));
}

} // namespace

TEST_CASE("closure: trivial and SL2(F5)") {
    FiniteGroup one = FiniteGroup::closure({GroupElement::identity(5, 2, 1)});
    CHECK(one.order() == 1);

    FiniteGroup g = sl2_f(5);
    CHECK(g.order() == 120);
    CHECK(g.order() == full_sl2_order(5, 1));

    // independent brute force over all det-1 matrices mod 5
    std::set<std::array<uint64_t, 4>> brute;
    for (uint64_t a = 0; a < 5; ++a)
        for (uint64_t b = 0; b < 5; ++b)
            for (uint64_t c = 0; c < 5; ++c)
                for (uint64_t d = 0; d < 5; ++d)
                    if ((a * d + 5 * 5 - b * c) % 5 == 1) brute.insert({a, b, c, d});
    REQUIRE(brute.size() == 120);
    for (std::size_t i = 0; i < g.order(); ++i)
        CHECK(brute.count(g.element(i).factor(0).residues()) == 1);
}

TEST_CASE("closure: the three level-1 generators give the full ball mod 25") {
    FiniteGroup b1 = FiniteGroup::closure(ball_generators(5, 2, {1}));
    CHECK(b1.order() == 125);
    // every element is trivial mod 5, and all such matrices appear
    for (std::size_t i = 0; i < b1.order(); ++i)
        CHECK(b1.element(i).congruent_identity(1));
}

TEST_CASE("closure is order-independent and idempotent") {
    auto gens = ball_generators(5, 2, {1});
    FiniteGroup a = FiniteGroup::closure(gens);
    std::reverse(gens.begin(), gens.end());
    FiniteGroup b = FiniteGroup::closure(gens);
    CHECK(a == b);
    std::vector<GroupElement> all;
    for (std::size_t i = 0; i < a.order(); ++i) all.push_back(a.element(i));
    CHECK(FiniteGroup::closure(all) == a);
    CHECK(FiniteGroup::from_elements(all) == a);
}

TEST_CASE("closure: cap enforcement and bad input") {
    CHECK_THROWS_AS(FiniteGroup::closure(ball_generators(5, 1, {0}), 10), CapExceeded);
    CHECK_THROWS_AS(FiniteGroup::closure({elt1(5, 2, {1, 1, 1, 1})}), DomainError);
    CHECK_THROWS_AS(FiniteGroup::closure({}), PreconditionError);
    // l^m must stay below the packing bound
    CHECK_THROWS_AS(FiniteGroup::closure({GroupElement::identity(5, 14, 1)}), DomainError);
}

TEST_CASE("from_elements rejects non-subgroups") {
    GroupElement id = GroupElement::identity(5, 1, 1);
    GroupElement r1 = elt1(5, 1, {1, 1, 0, 1});
    CHECK_THROWS_AS(FiniteGroup::from_elements({id, r1}), PreconditionError);
    CHECK_THROWS_AS(FiniteGroup::from_elements({r1, group_pow(r1, 2), group_pow(r1, 3),
                                                group_pow(r1, 4)}),
                    PreconditionError); // identity missing
    FiniteGroup c5 = FiniteGroup::from_elements({id, r1, group_pow(r1, 2),
                                                 group_pow(r1, 3), group_pow(r1, 4)});
    CHECK(c5.order() == 5);
    CHECK(c5.generators().size() == 1);
}

namespace {
bool words_less_entry(const FiniteGroup& g, std::size_t a, std::size_t b) {
    auto ra = g.element(a).factor(0).residues();
    auto rb = g.element(b).factor(0).residues();
    return ra < rb;
}
} // namespace

TEST_CASE("canonical order is strictly increasing") {
    FiniteGroup g = sl2_f(5);
    for (std::size_t i = 1; i < g.order(); ++i) {
        CHECK(words_less_entry(g, i - 1, i));
        CHECK(g.contains(g.element(i)));
    }
    CHECK_FALSE(g.contains(elt1(5, 1, {2, 0, 0, 2}))); // det 4
}

TEST_CASE("derived subgroup: abelian, perfect, and ball cases") {
    FiniteGroup d5 = FiniteGroup::closure({elt1(5, 2, {6, 0, 0, 21})});
    CHECK(derived_subgroup(d5).order() == 1);

    FiniteGroup g = sl2_f(5);
    FiniteGroup gp = derived_subgroup(g);
    CHECK(gp == g);

    // commutators of B5(1) fill B5(2) at precision 4
    FiniteGroup c = derived_subgroup(
        FiniteGroup::closure(ball_generators(5, 4, {1})));
    CHECK(contains_ball(c, {2}));
    CHECK_FALSE(contains_ball(c, {1}));
}

TEST_CASE("comm_subgroup: ball commutator containment, no ball enumeration") {
    // [B(s1), B(s2)] >= B(s1+s2+v), checked via generators only
    struct Case { uint64_t l; unsigned s1, s2, m; };
    for (Case e : {Case{3, 1, 1, 3}, Case{5, 1, 1, 3}, Case{5, 1, 2, 4}, Case{2, 2, 2, 6}}) {
        unsigned v = (e.l == 2) ? 1 : 0;
        FiniteGroup c = comm_subgroup(ball_generators(e.l, e.m, {e.s1}),
                                      ball_generators(e.l, e.m, {e.s2}));
        CHECK(contains_ball(c, {e.s1 + e.s2 + v}));
    }
}

TEST_CASE("reduction image and kernel") {
    FiniteGroup g = FiniteGroup::closure(ball_generators(5, 2, {0}));
    CHECK(g.order() == full_sl2_order(5, 2)); // 15000
    CHECK(reduction_image(g, 2) == g);
    FiniteGroup img = reduction_image(g, 1);
    CHECK(img.order() == 120);
    CHECK(img.precision() == 1);
    FiniteGroup ker = reduction_kernel(g, 1);
    CHECK(ker.order() == 125);
    CHECK(ker.precision() == 2);
    CHECK(group_index(g, ker) == 120);

    FiniteGroup ball = FiniteGroup::closure(ball_generators(5, 2, {1}));
    CHECK(reduction_image(ball, 1).order() == 1);
}

TEST_CASE("projection keeps slots and group structure") {
    auto gens = ball_generators(5, 2, {1, 1});
    FiniteGroup g = FiniteGroup::closure(gens);
    CHECK(g.order() == 125 * 125);
    FiniteGroup p0 = project(g, {0});
    CHECK(p0.order() == 125);
    CHECK(p0.factors() == 1);
    FiniteGroup p01 = project(g, {0, 1});
    CHECK(p01 == g);
    CHECK_THROWS_AS(project(g, {1, 0}), DomainError);
}

TEST_CASE("subgroup_where extracts congruence subgroups") {
    FiniteGroup g = FiniteGroup::closure(ball_generators(5, 2, {0}));
    FiniteGroup k = subgroup_where(g, [](const GroupElement& e) {
        return e.congruent_identity(1);
    });
    CHECK(k == reduction_kernel(g, 1));
    CHECK_THROWS_AS(subgroup_where(g, [](const GroupElement& e) {
        return e.factor(0).at(1).residue() == 1;
    }), PreconditionError);
}

TEST_CASE("contains_ball: positive, negative and domain errors") {
    FiniteGroup full = FiniteGroup::closure(ball_generators(5, 2, {0}));
    CHECK(contains_ball(full, {0}));
    CHECK(contains_ball(full, {1}));
    CHECK(contains_ball(full, {2})); // trivial ball

    FiniteGroup b1 = FiniteGroup::closure(ball_generators(5, 3, {1}));
    CHECK(contains_ball(b1, {1}));
    CHECK_FALSE(contains_ball(b1, {0}));

    FiniteGroup two = FiniteGroup::closure(ball_generators(2, 6, {2}));
    CHECK(two.order() == 4096);
    CHECK(contains_ball(two, {2}));
    CHECK_THROWS_AS(contains_ball(two, {1}), DomainError);
    CHECK_THROWS_AS(contains_ball(two, {0}), DomainError);

    FiniteGroup three = FiniteGroup::closure(ball_generators(3, 2, {1}));
    CHECK_THROWS_AS(contains_ball(three, {0}), DomainError);
    CHECK_THROWS_AS(contains_ball(three, {1, 1}), DomainError);
}

TEST_CASE("lagrange holds across constructed subgroups") {
    FiniteGroup g = sl2_f(5);
    // upper-triangular Borel: torus diag(2, 3) and the transvection R(1)
    FiniteGroup borel = FiniteGroup::closure({elt1(5, 1, {2, 0, 0, 3}),
                                              elt1(5, 1, {1, 1, 0, 1})});
    CHECK(borel.order() == 20);
    CHECK(group_index(g, borel) == 6);
    CHECK_THROWS_AS(group_index(borel, g), PreconditionError);
}

TEST_CASE("power_stabilize splits mixed tuples (trivial-mod-l slot dies)") {
    // (x, y): x trivial mod 5, y of mod-5 order 4; r = 5 fixes both in the limit
    PadicScalar t5(5, 2, 5);
    GroupElement x({gen_L(t5), Mat2::from_residues(5, 2, {2, 0, 0, 13})});
    GroupElement lim = power_stabilize(x, 5);
    CHECK(lim.factor(0).congruent_identity(2)); // first slot converged to Id
    Mat2 z = lim.factor(1);
    CHECK(mat_pow(z, 5) == z);
    // mod-5 order of the second slot is preserved (order 4)
    CHECK(mat_pow(z, 4).congruent_identity(1));
    CHECK_FALSE(mat_pow(z, 2).congruent_identity(1));

    // order-3 part needs r = 25 at l = 5
    GroupElement y({gen_L(t5), Mat2::from_residues(5, 2, {0, 24, 1, 24})});
    GroupElement lim2 = power_stabilize(y, 25);
    CHECK(lim2.factor(0).congruent_identity(2));
    CHECK(mat_pow(mat_pow(lim2.factor(1), 5), 5) == lim2.factor(1));
    CHECK(mat_pow(lim2.factor(1), 3).congruent_identity(1));
    CHECK_FALSE(lim2.factor(1).congruent_identity(1));

    // same split at l = 7: [-R(7)] = -Id mod 7, second slot of mod-7 order 3
    GroupElement w({Mat2::from_residues(7, 2, {48, 7, 0, 48}),
                    Mat2::from_residues(7, 2, {2, 0, 0, 25})});
    GroupElement lim3 = power_stabilize(w, 7);
    CHECK(lim3.factor(0) == Mat2::from_residues(7, 2, {48, 0, 0, 48}));
    Mat2 z7 = lim3.factor(1);
    CHECK(mat_pow(z7, 7) == z7);
    CHECK(mat_pow(z7, 3).congruent_identity(1));
    CHECK_FALSE(z7.congruent_identity(1));
}

TEST_CASE("graph_defect: diagonal graphs, products and twisted graphs") {
    // pure diagonal {(g, g)} over SL2(F5)
    FiniteGroup g = sl2_f(5);
    std::vector<GroupElement> diag_gens;
    for (const auto& e : g.generators())
        diag_gens.push_back(GroupElement({e.factor(0), e.factor(0)}));
    FiniteGroup diag = FiniteGroup::closure(diag_gens);
    CHECK(diag.order() == 120);
    CHECK(!graph_defect(diag, 1).has_value());

    // direct product has defects in both slots
    auto prod_gens = ball_generators(5, 1, {0, 0});
    FiniteGroup prod = FiniteGroup::closure(prod_gens);
    auto w = graph_defect(prod, 1);
    REQUIRE(w.has_value());
    CHECK(w->factor(0).congruent_identity(1) != w->factor(1).congruent_identity(1));

    CHECK_THROWS_AS(graph_defect(g, 1), PreconditionError);
}

TEST_CASE("graph_defect: conjugation graph extended by a kernel on slot 2") {
    // {(g, h) : h = M g M^-1 mod 5} inside SL2(Z/25)^2
    Mat2 M = Mat2::from_residues(5, 2, {1, 1, 1, 2});
    Mat2 Minv = M.inverse();
    std::vector<GroupElement> gens;
    for (const auto& e : ball_generators(5, 2, {0}))
        gens.push_back(GroupElement({e.factor(0), M * e.factor(0) * Minv}));
    for (const auto& e : ball_generators(5, 2, {1}))
        gens.push_back(GroupElement({Mat2::identity(5, 2), e.factor(0)}));
    FiniteGroup g = FiniteGroup::closure(gens, 1u << 22);
    CHECK(g.order() == full_sl2_order(5, 2) * 125);
    CHECK(!graph_defect(g, 1).has_value());
    auto w = graph_defect(g, 2);
    REQUIRE(w.has_value());
    CHECK(w->factor(0).congruent_identity(2) != w->factor(1).congruent_identity(2));
}

TEST_CASE("goursat n=2: hypothesis equals conclusion") {
    FiniteGroup g = FiniteGroup::closure(ball_generators(5, 2, {1, 1}));
    GoursatReport rep = goursat_combine(g, {{0, 1}, {1, 0}});
    CHECK(rep.verified);
    CHECK(rep.conclusion == std::vector<unsigned>{1, 1});
}

TEST_CASE("goursat n=3 over a ball-product oracle") {
    BallProductOracle g(5, 3, {1, 1, 1});
    GoursatReport rep = goursat_combine(g, {{0, 1, 1}, {1, 0, 1}, {1, 1, 0}});
    CHECK(rep.verified);
    CHECK(rep.conclusion == std::vector<unsigned>{2, 2, 2});
    CHECK(rep.log.size() == 3);
}

TEST_CASE("goursat n=3 at l=2 includes the v corrections") {
    BallProductOracle g(2, 8, {2, 2, 2});
    GoursatReport rep = goursat_combine(g, {{0, 2, 2}, {2, 0, 2}, {2, 2, 0}});
    CHECK(rep.verified);
    CHECK(rep.conclusion == std::vector<unsigned>{5, 5, 5});
}

TEST_CASE("goursat: unmet hypotheses and bad level matrices throw") {
    BallProductOracle g(5, 3, {1, 1, 2});
    CHECK_THROWS_AS(goursat_combine(g, {{0, 1, 1}, {1, 0, 1}, {1, 1, 0}}),
                    HypothesisUnmet);
    BallProductOracle h(5, 3, {1, 1, 1});
    CHECK_THROWS_AS(goursat_combine(h, {{0, 1, 2}, {1, 0, 1}, {1, 1, 0}}),
                    PreconditionError); // asymmetric
    CHECK_THROWS_AS(goursat_combine(h, {{0, 1}, {1, 0}}), PreconditionError);
    BallProductOracle e2(2, 8, {2, 2, 2});
    CHECK_THROWS_AS(goursat_combine(e2, {{0, 1, 1}, {1, 0, 1}, {1, 1, 0}}),
                    DomainError); // l = 2 needs pair levels >= 2
}

TEST_CASE("goursat witnesses survive a structured (non-product) oracle") {
    // {(a, b, c) in SL2(Z/5^4)^3 : a = b mod 5} — far too large to enumerate
    struct DiagOracle final : GroupOracle {
        uint64_t ell() const override { return 5; }
        unsigned precision() const override { return 4; }
        unsigned factors() const override { return 3; }
        bool contains(const GroupElement& g) const override {
            PadicScalar one(5, 4, 1);
            for (unsigned f = 0; f < 3; ++f)
                if (g.factor(f).det() != one) return false;
            for (unsigned i = 0; i < 4; ++i)
                if (g.factor(0).at(i).residue() % 5 != g.factor(1).at(i).residue() % 5)
                    return false;
            return true;
        }
        bool pair_contains_ball(unsigned, unsigned, unsigned s) const override {
            // all three pair projections contain B(s, s) for s >= 1: the pair
            // (0,1) because both parts are trivial mod 5 there, the others
            // because those projections are full products
            return s >= 1;
        }
        std::string describe() const override { return "a=b mod 5 congruence"; }
    };
    DiagOracle g;
    GoursatReport rep = goursat_combine(g, {{0, 1, 1}, {1, 0, 1}, {1, 1, 0}});
    CHECK(rep.verified);
    CHECK(rep.conclusion == std::vector<unsigned>{2, 2, 2});
}

TEST_CASE("normal_closure stays inside the ambient group") {
    FiniteGroup g = sl2_f(5);
    // normal closure of a transvection in SL2(F5) is everything
    FiniteGroup n = FiniteGroup::normal_closure({elt1(5, 1, {1, 1, 0, 1})},
                                                g.generators());
    CHECK(n == g);
    // normal closure of -Id is just the center
    FiniteGroup z = FiniteGroup::normal_closure({elt1(5, 1, {4, 0, 0, 4})},
                                                g.generators());
    CHECK(z.order() == 2);
}
