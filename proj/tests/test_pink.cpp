#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <string>
#include <vector>

#include "pinkforge/dickson.hpp"
#include "pinkforge/errors.hpp"
#include "pinkforge/group.hpp"
#include "pinkforge/modlattice.hpp"
#include "pinkforge/pink.hpp"

using namespace pinkforge;

namespace {

const FiniteGroup& ball51() {
    static const FiniteGroup g = FiniteGroup::closure(ball_generators(5, 3, {1}));
    return g;
}

const FiniteGroup& ball33() {
    static const FiniteGroup g = FiniteGroup::closure(ball_generators(3, 3, {1, 1}));
    return g;
}

FiniteGroup graph_group(const Mat2& M, const std::vector<Mat2>& base,
                        std::vector<GroupElement> extra = {}) {
    const Mat2 Minv = M.inverse();
    std::vector<GroupElement> gens;
    for (const Mat2& g : base)
        gens.push_back(GroupElement({g, M * g * Minv}));
    for (GroupElement& e : extra) gens.push_back(std::move(e));
    return FiniteGroup::closure(gens);
}

const FiniteGroup& graph49() {
    static const FiniteGroup g =
        graph_group(gen_R(7, 2, 1), {gen_L(7, 2, 1), gen_R(7, 2, 1)});
    return g;
}

// residue-preserving lift mod l^2 with the determinant pushed back to 1
Mat2 lift_det1(uint64_t l, const Mat2& xbar) {
    const std::array<uint64_t, 4> r = xbar.residues();
    const Mat2 raw = Mat2::from_residues(l, 2, r);
    const PadicScalar fix = raw.det().inverse();
    const PadicScalar one(l, 2, 1);
    return Mat2(raw.at(0) * fix, raw.at(1), raw.at(2) * fix, raw.at(3));
}

} // namespace

TEST_CASE("lie_algebra spans the expected lattices") {
    CHECK(lie_algebra(FiniteGroup::trivial(5, 3, 1)).is_zero());

    CHECK(ball51().order() == 15625);
    CHECK(lie_algebra(ball51()) == ModLattice::scaled_full(5, 3, 3, 1));

    const FiniteGroup full = FiniteGroup::closure(ball_generators(5, 2, {0}));
    CHECK(lie_algebra(full) == ModLattice::scaled_full(5, 2, 3, 0));

    // l = 2: one digit shorter, and the group must be trivial mod 4
    const FiniteGroup b22 = FiniteGroup::closure(ball_generators(2, 4, {2}));
    const ModLattice l2 = lie_algebra(b22);
    CHECK(l2.precision() == 3);
    CHECK(least_scaled_basis_level(l2) == 2);

    const FiniteGroup bad = FiniteGroup::closure({GroupElement({gen_R(2, 4, 2)})});
    CHECK_THROWS_AS(lie_algebra(bad), DomainError);
}

TEST_CASE("least_scaled_basis_level finds the first certified level") {
    CHECK(least_scaled_basis_level(ModLattice::scaled_full(5, 4, 3, 2)) == 2);
    CHECK(least_scaled_basis_level(ModLattice::scaled_full(5, 4, 3, 0)) == 0);
    CHECK(!least_scaled_basis_level(ModLattice::zero_lattice(5, 4, 3)));
    const ModLattice plane = ModLattice::span(5, 4, 3, {{1, 0, 0}, {0, 1, 0}});
    CHECK(!least_scaled_basis_level(plane));
}

TEST_CASE("trace_form_module pairs the basis rows") {
    CHECK(trace_form_module(ModLattice::zero_lattice(3, 4, 3)).is_zero());

    const ModLattice tr = trace_form_module(ModLattice::scaled_full(5, 3, 3, 1));
    CHECK(tr.dim() == 1);
    CHECK(tr.contains({50}));
    CHECK(tr.contains({25}));
    CHECK_FALSE(tr.contains({5}));

    // a nilpotent line pairs to zero
    const ModLattice nil = ModLattice::span(3, 4, 3, {{1, 0, 0}});
    CHECK(trace_form_module(nil).is_zero());

    const ModLattice tr2 = trace_form_module(ModLattice::scaled_full(3, 4, 6, 1));
    CHECK(tr2.dim() == 2);
    CHECK(tr2.contains({9, 0}));
    CHECK(tr2.contains({0, 9}));
    CHECK_FALSE(tr2.contains({3, 0}));

    CHECK_THROWS_AS(trace_form_module(ModLattice::zero_lattice(3, 4, 4)),
                    DomainError);
}

TEST_CASE("pink_proell_check certifies the derived-subgroup ball") {
    const PinkReport rep = pink_proell_check(ball51(), 1);
    CHECK(rep.verdict == Verdict::Verified);
    CHECK(rep.k_found == 1);
    CHECK(rep.conclusion_checked == std::vector<unsigned>{2});

    const PinkReport shallow = pink_proell_check(ball51(), 2);
    CHECK(shallow.verdict == Verdict::InconclusiveAtPrecision);
    CHECK(shallow.k_found == 1);
    CHECK(shallow.conclusion_checked.empty());

    const PinkReport rep2 = pink_proell_check(ball33(), 1);
    CHECK(rep2.verdict == Verdict::Verified);
    CHECK(rep2.conclusion_checked == std::vector<unsigned>({2, 2}));

    // a torus line spans no full algebra
    const FiniteGroup torus = FiniteGroup::closure({GroupElement({gen_D(5, 3, 5)})});
    CHECK_THROWS_AS(pink_proell_check(torus, 1), HypothesisUnmet);

    const FiniteGroup pro2 = FiniteGroup::closure(ball_generators(2, 4, {2}));
    CHECK_THROWS_AS(pink_proell_check(pro2, 1), DomainError);
    const FiniteGroup full = FiniteGroup::closure(ball_generators(5, 2, {0}));
    CHECK_THROWS_AS(pink_proell_check(full, 1), PreconditionError);
}

TEST_CASE("approx_eigen_check accepts approximate eigenpairs") {
    auto S = [](int64_t v) { return PadicScalar(2, 10, v); };
    // w = (1, 0) is an eigenvector mod 2^7 only
    const std::vector<std::vector<PadicScalar>> g{{S(5), S(128)},
                                                  {S(384), S(205)}};
    CHECK(approx_eigen_check(g, S(5), {S(1), S(0)}, 7, 0));

    const std::vector<std::vector<PadicScalar>> d{{S(5), S(0)}, {S(0), S(205)}};
    CHECK(approx_eigen_check(d, S(5), {S(1), S(0)}, 10, 0));

    auto T = [](int64_t v) { return PadicScalar(5, 4, v); };
    const std::vector<std::vector<PadicScalar>> g3{
        {T(1), T(0), T(0)}, {T(0), T(2), T(0)}, {T(0), T(0), T(3)}};
    CHECK(approx_eigen_check(g3, T(2), {T(0), T(1), T(0)}, 4, 0));

    // the congruence must hold at nlevel, w must be nonzero mod l^{alpha+1}
    CHECK_THROWS_AS(approx_eigen_check(g, S(5), {S(1), S(0)}, 8, 0),
                    PreconditionError);
    CHECK_THROWS_AS(approx_eigen_check(g, S(5), {S(2), S(0)}, 7, 0),
                    PreconditionError);
    CHECK_THROWS_AS(approx_eigen_check(g, S(5), {S(1), S(0)}, 11, 0),
                    PreconditionError);
    CHECK_THROWS_AS(approx_eigen_check({{S(5)}}, S(5), {S(1), S(0)}, 7, 0),
                    DomainError);
}

TEST_CASE("sylow_preimage_T realizes the prime-to-l index") {
    CHECK(sylow_preimage_T(ball51()) == ball51());

    const FiniteGroup sl29 = FiniteGroup::closure(
        {GroupElement({gen_L(3, 2, 1)}), GroupElement({gen_R(3, 2, 1)})});
    CHECK(sl29.order() == 648);
    CHECK(group_index(sl29, sylow_preimage_T(sl29)) == 8);

    const FiniteGroup sl25 = FiniteGroup::closure(ball_generators(5, 2, {0}));
    CHECK(group_index(sl25, sylow_preimage_T(sl25)) == 24);

    // two factors; only mod-l data matters for the index
    std::vector<GroupElement> gens;
    for (char kind : {'L', 'R'})
        for (unsigned slot : {0u, 1u})
            gens.push_back(gen_tuple(kind, slot, 2, PadicScalar(5, 1, 1)));
    const FiniteGroup prod = FiniteGroup::closure(gens);
    CHECK(prod.order() == 14400);
    CHECK(group_index(prod, sylow_preimage_T(prod)) == 576);
}

TEST_CASE("first_reduction keeps a full graph whole") {
    CHECK(graph49().order() == 115248);
    const FirstReductionReport fr = first_reduction(graph49(), 1, 1);
    CHECK(fr.case_found == 3);
    CHECK(fr.verdict == Verdict::Verified);
    CHECK(fr.index == 1);
    CHECK(fr.T->order() == graph49().order());
}

TEST_CASE("first_reduction removes a crossed sign at index 2") {
    const Mat2 nid = Mat2::from_residues(7, 2, {48, 0, 0, 48});
    const FiniteGroup G =
        graph_group(gen_R(7, 2, 1), {gen_L(7, 2, 1), gen_R(7, 2, 1)},
                    {GroupElement({Mat2::identity(7, 2), nid})});
    CHECK(G.order() == 230496);
    const FirstReductionReport fr = first_reduction(G, 1, 1);
    CHECK(fr.case_found == 3);
    CHECK(fr.verdict == Verdict::Verified);
    CHECK(fr.index == 2);
    CHECK(fr.index_chain == std::vector<std::size_t>({1, 2, 1}));
    CHECK(fr.T->order() == 115248);
}

TEST_CASE("first_reduction reports an easy element") {
    // diag(30, 18) has order 3 mod 49
    const Mat2 t3 = Mat2::from_residues(7, 2, {30, 0, 0, 18});
    std::vector<GroupElement> gens = ball_generators(7, 2, {1, 1});
    gens.push_back(GroupElement({Mat2::identity(7, 2), t3}));
    const FiniteGroup G = FiniteGroup::closure(gens);
    CHECK(G.order() == 3 * 117649);
    const FirstReductionReport fr = first_reduction(G, 1, 1);
    CHECK(fr.case_found == 1);
    CHECK(fr.easy_witness.has_value());
    CHECK(fr.verdict == Verdict::InconclusiveAtPrecision);
    CHECK(fr.checked_level == 0);
}

TEST_CASE("first_reduction keeps a pro-l group whole") {
    const FiniteGroup G = FiniteGroup::closure(ball_generators(7, 2, {1, 1}));
    CHECK(G.order() == 117649);
    const FirstReductionReport fr = first_reduction(G, 1, 1);
    CHECK(fr.case_found == 2);
    CHECK(fr.verdict == Verdict::Verified);
    CHECK(fr.index == 1);
    CHECK(fr.T->order() == G.order());
}

TEST_CASE("first_reduction on a split Cartan graph") {
    const Mat2 t = Mat2::from_residues(7, 2, {3, 0, 0, 33});
    const FiniteGroup G =
        graph_group(Mat2::identity(7, 2), {t, gen_L(7, 2, 7), gen_R(7, 2, 7)});
    CHECK(G.order() == 2058);
    const FirstReductionReport fr = first_reduction(G, 1, 1);
    CHECK(fr.case_found == 3);
    CHECK(fr.verdict == Verdict::Verified);
    CHECK(fr.index == 1);
}

TEST_CASE("first_reduction on a Borel graph") {
    const Mat2 t = Mat2::from_residues(7, 2, {3, 0, 0, 33});
    const FiniteGroup G =
        graph_group(Mat2::identity(7, 2), {t, gen_R(7, 2, 1), gen_L(7, 2, 7)});
    CHECK(G.order() == 14406);
    const FirstReductionReport fr = first_reduction(G, 1, 1);
    CHECK(fr.case_found == 3);
    CHECK(fr.verdict == Verdict::Verified);
    CHECK(fr.index == 1);
}

TEST_CASE("first_reduction descends a normalizer and lands pro-l") {
    // nonsplit torus generator mod 7, lifted with determinant 1
    const Mat2 t = Mat2::from_residues(7, 2, {0, 1, 48, 3});
    const Mat2 tbar = Mat2::from_residues(7, 1, t.residues());
    const Mat2 tbar_inv = tbar.inverse();
    const FiniteGroup sl27 = FiniteGroup::closure(ball_generators(7, 1, {0}));
    Mat2 inverter = Mat2::identity(7, 2);
    bool found = false;
    for (std::size_t i = 0; i < sl27.order() && !found; ++i) {
        const Mat2 s = sl27.element(i).factor(0);
        if (s * tbar == tbar_inv * s) {
            inverter = lift_det1(7, s);
            found = true;
        }
    }
    REQUIRE(found);
    const FiniteGroup G = graph_group(
        Mat2::identity(7, 2), {t, inverter, gen_L(7, 2, 7), gen_R(7, 2, 7)});
    CHECK(G.order() == 5488);
    const FirstReductionReport fr = first_reduction(G, 1, 1);
    CHECK(fr.case_found == 2);
    CHECK(fr.verdict == Verdict::Verified);
    CHECK(fr.index_chain == std::vector<std::size_t>({2, 1, 8}));
    CHECK(fr.index == 16);
    CHECK(fr.T->order() == 343);
}

TEST_CASE("first_reduction guards") {
    const Mat2 t = Mat2::from_residues(7, 2, {3, 0, 0, 33});
    const FiniteGroup thin = FiniteGroup::closure({GroupElement({t, t})});
    CHECK_THROWS_AS(first_reduction(thin, 1, 1), HypothesisUnmet);
    CHECK_THROWS_AS(first_reduction(ball33(), 1, 1), PreconditionError);
    CHECK_THROWS_AS(first_reduction(ball51(), 1, 1), PreconditionError);
    CHECK_THROWS_AS(first_reduction(graph49(), 0, 1), PreconditionError);
    CHECK_THROWS_AS(first_reduction(graph49(), 1, 2), PreconditionError);
}

TEST_CASE("main_theorem_harness reports honest verdicts") {
    const FiniteGroup sl81 = FiniteGroup::closure(
        {GroupElement({gen_L(3, 4, 1)}), GroupElement({gen_R(3, 4, 1)})});
    const PinkReport rep = main_theorem_harness(sl81, 1);
    CHECK(rep.verdict == Verdict::InconclusiveAtPrecision);
    CHECK(rep.k_found == 1);
    CHECK(rep.conclusion_checked == std::vector<unsigned>{2});
    CHECK(rep.subgroup_indices == std::vector<std::size_t>({8, 3}));

    const PinkReport rep2 = main_theorem_harness(ball33(), 1);
    CHECK(rep2.verdict == Verdict::InconclusiveAtPrecision);
    CHECK(rep2.conclusion_checked == std::vector<unsigned>({2, 2}));
    CHECK(rep2.detail.find("recombined") != std::string::npos);

    // k at or above the lattice precision cannot even be stated
    const PinkReport deep = main_theorem_harness(ball51(), 5);
    CHECK(deep.verdict == Verdict::InconclusiveAtPrecision);
    CHECK(deep.conclusion_checked.empty());

    // the core of a clean graph spans no full algebra
    CHECK_THROWS_AS(main_theorem_harness(graph49(), 1), HypothesisUnmet);
}

TEST_CASE("example_graph_group matches its order formula") {
    const FiniteGroup G = example_graph_group(3, 4, 6);
    CHECK(G.order() == 32768);
    CHECK(!graph_defect(G, 3).has_value());
    CHECK(!graph_defect(G, 4).has_value());
    CHECK(graph_defect(G, 5).has_value());
    CHECK(graph_defect(G, 6).has_value());
    CHECK_THROWS_AS(example_graph_group(3, 4, 12), CapExceeded);
    CHECK_THROWS_AS(example_graph_group(2, 4, 6), PreconditionError);
    CHECK_THROWS_AS(example_graph_group(3, 3, 6), PreconditionError);
    CHECK_THROWS_AS(example_graph_group(4, 6, 6), PreconditionError);
}

TEST_CASE("conjugation identities behind the asymmetry") {
    CHECK(graph_group_conjugation_identities(3, 16));
    CHECK(graph_group_conjugation_identities(4, 16));
    CHECK(graph_group_conjugation_identities(1, 8));
    CHECK_THROWS_AS(graph_group_conjugation_identities(5, 17), PreconditionError);
}

TEST_CASE("adding the global sign changes neither derived group nor algebra") {
    std::vector<GroupElement> gens{GroupElement({gen_R(5, 2, 1)}),
                                   GroupElement({gen_L(5, 2, 5)})};
    const FiniteGroup G = FiniteGroup::closure(gens);
    const Mat2 nid = Mat2::from_residues(5, 2, {24, 0, 0, 24});
    CHECK_FALSE(G.contains(GroupElement({nid})));
    gens.push_back(GroupElement({nid}));
    const FiniteGroup W = FiniteGroup::closure(gens);
    CHECK(W.order() == 2 * G.order());
    CHECK(derived_subgroup(G) == derived_subgroup(W));
    CHECK(lie_algebra(G) == lie_algebra(W));

    // two factors: the extra sign is the global one
    std::vector<GroupElement> bg = ball_generators(3, 2, {1, 1});
    const FiniteGroup B = FiniteGroup::closure(bg);
    const Mat2 nid3 = Mat2::from_residues(3, 2, {8, 0, 0, 8});
    bg.push_back(GroupElement({nid3, nid3}));
    const FiniteGroup BW = FiniteGroup::closure(bg);
    CHECK(BW.order() == 2 * B.order());
    CHECK(derived_subgroup(B) == derived_subgroup(BW));
    CHECK(lie_algebra(B) == lie_algebra(BW));
}

TEST_CASE("a nontrivial normalized element forces algebra growth") {
    // lattice stage: one depth-1 vector saturates four levels deeper
    const ModLattice W = ModLattice::span(5, 8, 3, {{0, 5, 0}});
    const ModLattice S = conj_saturate(W, 1, 1);
    CHECK(S.contains_scaled_basis(5));

    // group stage: a kernel factor plus a diagonal torus
    std::vector<GroupElement> gens;
    for (const GroupElement& g : ball_generators(5, 3, {1}))
        gens.push_back(GroupElement({Mat2::identity(5, 3), g.factor(0)}));
    gens.push_back(GroupElement({gen_D(5, 3, 5), gen_D(5, 3, 5)}));
    const FiniteGroup G = FiniteGroup::closure(gens);
    CHECK(G.order() == 25 * 15625);

    const ModLattice L = lie_algebra(G);
    std::vector<uint64_t> v(6, 0);
    v[3] = 5; // x-line of the second factor
    CHECK(L.contains(v));
    CHECK(!least_scaled_basis_level(L)); // the first factor never fills up

    // slicing off the first factor leaves a certifiable pro-l group
    const FiniteGroup slice = subgroup_where(G, [](const GroupElement& g) {
        return g.factor(0).congruent_identity(3);
    });
    const PinkReport rep = pink_proell_check(project(slice, {1}), 1);
    CHECK(rep.verdict == Verdict::Verified);

    // and the composite containment holds in G' itself
    const FiniteGroup D = derived_subgroup(G);
    for (const GroupElement& g : ball_generators(5, 3, {2}))
        CHECK(D.contains(GroupElement({Mat2::identity(5, 3), g.factor(0)})));
}

TEST_CASE("a graph has a small algebra until a kernel element breaks it") {
    const Mat2 M = Mat2::from_residues(7, 3, {3, 1, 2, 1});
    const Mat2 Minv = M.inverse();
    std::vector<GroupElement> gens;
    for (const GroupElement& g : ball_generators(7, 3, {1}))
        gens.push_back(GroupElement({g.factor(0), M * g.factor(0) * Minv}));
    const FiniteGroup G = FiniteGroup::closure(gens);
    CHECK(G.order() == 117649);
    CHECK(!graph_defect(G, 2).has_value());
    CHECK(!graph_defect(G, 3).has_value());
    const ModLattice L = lie_algebra(G);
    CHECK(!L.contains_scaled_basis(1));
    CHECK(!L.contains_scaled_basis(2));

    // perturb the full-level graph by one kernel element; the commutator
    // seeds land in the derived subgroup, and their normal closure restores
    // a one-sided ball without the perturbed group ever being enumerated
    std::vector<GroupElement> pgens;
    for (const Mat2& u : {gen_L(7, 3, 1), gen_R(7, 3, 1)})
        pgens.push_back(GroupElement({u, M * u * Minv}));
    const GroupElement pert({Mat2::identity(7, 3), gen_L(7, 3, 7)});
    pgens.push_back(pert);
    const std::vector<GroupElement> seeds{comm(pgens[0], pert),
                                          comm(pgens[1], pert)};
    const FiniteGroup D2 = FiniteGroup::normal_closure(seeds, pgens);
    CHECK(D2.order() == 117649);
    for (const GroupElement& g : ball_generators(7, 3, {2}))
        CHECK(D2.contains(GroupElement({Mat2::identity(7, 3), g.factor(0)})));
    CHECK(graph_defect(D2, 2).has_value());
}

TEST_CASE("reports print stable key=value lines") {
    const PinkReport rep = pink_proell_check(ball51(), 1);
    const std::string s = rep.str();
    CHECK(s.find("verdict=Verified") != std::string::npos);
    CHECK(s.find("k_found=1") != std::string::npos);
    CHECK(s.find("conclusion_checked=2") != std::string::npos);

    const FirstReductionReport fr = first_reduction(graph49(), 1, 1);
    const std::string t = fr.str();
    CHECK(t.find("case=3") != std::string::npos);
    CHECK(t.find("verdict=Verified") != std::string::npos);
}
