#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pinkforge/catalog.hpp"
#include "pinkforge/errors.hpp"
#include "pinkforge/group.hpp"
#include "pinkforge/groupfile.hpp"
#include "pinkforge/mat2.hpp"
#include "pinkforge/pink.hpp"
#include "pinkforge/sampler.hpp"

using namespace pinkforge;

namespace {

GroupFile sl2_f5_file() {
    std::vector<GroupElement> gens = {GroupElement({gen_L(5, 1, 1)}),
                                      GroupElement({gen_R(5, 1, 1)})};
    return GroupFile::from_generators(gens, "sl2-f5");
}

} // namespace

TEST_CASE("group files round-trip through write and read") {
    GroupFile gf = sl2_f5_file();
    CHECK(gf.prime == 5);
    CHECK(gf.precision == 1);
    CHECK(gf.factors == 1);
    CHECK(gf.label == "sl2-f5");
    CHECK(gf.gens == std::vector<std::vector<uint64_t>>{{1, 0, 1, 1}, {1, 1, 0, 1}});

    const std::string text = gf.write();
    GroupFile back = GroupFile::read_string(text);
    CHECK(back == gf);
    CHECK(back.write() == text);

    gf.expect = "order=120";
    GroupFile back2 = GroupFile::read_string(gf.write());
    CHECK(back2.expect == "order=120");
    CHECK(back2 == gf);

    std::istringstream noisy(
        "# comment line\n"
        "\n"
        "prime=5\r\n"
        "precision=1\n"
        "factors=1\n"
        "label=sl2-f5\n"
        "gen=1,0,1,1\n"
        "\n"
        "gen=1,1,0,1\n");
    GroupFile from_stream = GroupFile::read(noisy);
    CHECK(from_stream == sl2_f5_file());

    CHECK(gf.close().order() == 120);

    std::vector<GroupElement> pair = {
        GroupElement({gen_L(7, 2, 1), gen_R(7, 2, 3)}),
        GroupElement({gen_R(7, 2, 7), gen_L(7, 2, 14)})};
    GroupFile two = GroupFile::from_generators(pair);
    CHECK(two.factors == 2);
    CHECK(two.gens.at(0).size() == 8);
    CHECK(GroupFile::read_string(two.write()) == two);
    std::vector<GroupElement> decoded = two.elements();
    REQUIRE(decoded.size() == 2);
    CHECK(decoded.at(0) == pair.at(0));
    CHECK(decoded.at(1) == pair.at(1));
}

TEST_CASE("group files reject malformed input") {
    auto bad = [](const std::string& text) {
        CHECK_THROWS_AS(GroupFile::read_string(text), ParseError);
    };
    const std::string head = "prime=5\nprecision=1\nfactors=1\n";

    bad("precision=1\nfactors=1\ngen=1,0,0,1\n");         // missing prime
    bad("prime=5\nfactors=1\ngen=1,0,0,1\n");             // missing precision
    bad("prime=5\nprecision=1\ngen=1,0,0,1\n");           // missing factors
    bad(head + "order=120\ngen=1,0,0,1\n");               // unknown key
    bad("prime=6\nprecision=1\nfactors=1\ngen=1,0,0,1\n");// composite modulus
    bad("prime=1\nprecision=1\nfactors=1\ngen=1,0,0,1\n");
    bad("prime=5\nprecision=0\nfactors=1\ngen=1,0,0,1\n");
    bad("prime=3\nprecision=45\nfactors=1\ngen=1,0,0,1\n"); // 3^45 overflows
    bad(head + "gen=1,1,1,1\n");                          // det 0
    bad(head + "gen=1,0,5,1\n");                          // residue out of range
    bad(head + "gen=1,0,1\n");                            // short row
    bad(head + "gen=1,0,0,1,1\n");                        // long row
    bad(head + "gen=1,a,0,1\n");                          // non-numeric residue
    bad("prime=5\nprecision=1\nfactors=2\ngen=1,0,0,1\n");// row ignores factors
}

TEST_CASE("catalog expressions evaluate exactly") {
    const std::map<std::string, PadicScalar> none;
    CHECK(eval_scalar_expr("(1+2*3)^2", 5, 4, none).residue() == 49);
    CHECK(eval_scalar_expr("-3", 5, 4, none).residue() == 622);
    CHECK(eval_scalar_expr("1/2", 7, 2, none).residue() == 25);

    std::map<std::string, PadicScalar> vars = {{"a", PadicScalar(5, 3, 10)}};
    CHECK(eval_scalar_expr("a*a + 1", 5, 3, vars).residue() == 101);

    CHECK(eval_matrix_expr("L(3) R(2)", 5, 3, none) ==
          gen_L(5, 3, 3) * gen_R(5, 3, 2));
    CHECK(eval_matrix_expr("L(3) * R(2)", 5, 3, none) ==
          gen_L(5, 3, 3) * gen_R(5, 3, 2));
    CHECK(eval_matrix_expr("W W W W", 5, 3, none) == Mat2::identity(5, 3));
    CHECK(eval_matrix_expr("W W", 5, 3, none) ==
          Mat2::from_residues(5, 3, {124, 0, 0, 124}));
    CHECK(eval_matrix_expr("Inv(L(3)) L(3)", 5, 3, none) == Mat2::identity(5, 3));
    CHECK(eval_matrix_expr("Comm(L(1), R(1))", 5, 3, none) ==
          comm(gen_L(5, 3, 1), gen_R(5, 3, 1)));
    CHECK(eval_matrix_expr("(L(1) R(1)) Inv(R(1))", 5, 3, none) ==
          gen_L(5, 3, 1));
    CHECK(eval_matrix_expr("D(a*a)", 5, 3, vars) == gen_D(5, 3, 100));

    CHECK_THROWS_AS(eval_scalar_expr("b + 1", 5, 3, vars), ParseError);
    CHECK_THROWS_AS(eval_scalar_expr("1/5", 5, 3, none), ParseError);
    CHECK_THROWS_AS(eval_scalar_expr("2 +", 5, 3, none), ParseError);
    CHECK_THROWS_AS(eval_matrix_expr("L(1) )", 5, 3, none), ParseError);
    CHECK_THROWS_AS(eval_matrix_expr("Q(1)", 5, 3, none), ParseError);
    CHECK_THROWS_AS(eval_matrix_expr("", 5, 3, none), ParseError);
}

TEST_CASE("builtin identity catalog passes for every supported prime") {
    IdentityCatalog cat = IdentityCatalog::builtin();
    REQUIRE(cat.entries.size() == 7);
    for (uint64_t l : {2ull, 3ull, 5ull, 7ull}) {
        for (const IdentityRunResult& r : run_catalog(cat, l, 6, 8, 1234)) {
            INFO("l=" << l << " identity " << r.name);
            CHECK(r.trials == 8);
            CHECK(r.failures == 0);
        }
    }
}

TEST_CASE("catalog text format parses and validates") {
    IdentityCatalog cat = IdentityCatalog::parse(
        "# comment\n"
        "swap-check | a:1 b:1 | L(a) R(b) | L(a) R(b)\n");
    REQUIRE(cat.entries.size() == 1);
    CHECK(cat.entries.at(0).name == "swap-check");
    CHECK(cat.entries.at(0).vars ==
          std::vector<std::pair<std::string, unsigned>>{{"a", 1}, {"b", 1}});
    std::vector<IdentityRunResult> res = run_catalog(cat, 3, 5, 6, 7);
    REQUIRE(res.size() == 1);
    CHECK(res.at(0).failures == 0);

    CHECK_THROWS_AS(IdentityCatalog::parse("name | a:1 | L(a)\n"), ParseError);
    CHECK_THROWS_AS(IdentityCatalog::parse("name | a:x | L(a) | L(a)\n"), ParseError);

    // An identity that is false must be reported, not thrown.
    IdentityCatalog wrong =
        IdentityCatalog::parse("bogus | a:1 | L(a) | R(a)\n");
    std::vector<IdentityRunResult> bad = run_catalog(wrong, 5, 4, 5, 99);
    CHECK(bad.at(0).failures == 5);
}

TEST_CASE("pro-l sampler emits deterministic pro-l generators") {
    GroupFile s1 = sample_proell(3, 3, 2, 3, 42);
    GroupFile s2 = sample_proell(3, 3, 2, 3, 42);
    CHECK(s1 == s2);
    CHECK(s1.prime == 3);
    CHECK(s1.precision == 3);
    CHECK(s1.factors == 2);
    CHECK(s1.label == "proell-sample");
    CHECK(s1.gens.size() == 3);
    for (const GroupElement& g : s1.elements()) CHECK(g.congruent_identity(1));
    CHECK(s1 != sample_proell(3, 3, 2, 3, 43));

    FiniteGroup G = sample_proell(3, 2, 2, 3, 7).close();
    std::size_t order = G.order();
    while (order % 3 == 0) order /= 3;
    CHECK(order == 1);
    CHECK(reduction_image(G, 1).order() == 1);

    CHECK_THROWS_AS(sample_proell(1, 3, 1, 1, 0), PreconditionError);
    CHECK_THROWS_AS(sample_proell(3, 1, 1, 1, 0), PreconditionError);
    CHECK_THROWS_AS(sample_proell(3, 3, 0, 1, 0), PreconditionError);
    CHECK_THROWS_AS(sample_proell(3, 3, 1, 0, 0), PreconditionError);
}

TEST_CASE("pair sampler families are deterministic and well formed") {
    std::set<std::string> labels;
    for (uint64_t seed = 0; seed < 7; ++seed) {
        GroupFile gf = sample_pair(7, 2, seed);
        CHECK(gf == sample_pair(7, 2, seed));
        CHECK(gf.prime == 7);
        CHECK(gf.precision == 2);
        CHECK(gf.factors == 2);
        CHECK(gf.label.rfind("pair-", 0) == 0);
        CHECK(!gf.elements().empty());
        labels.insert(gf.label);
    }
    CHECK(labels.size() >= 3);

    CHECK_THROWS_AS(sample_pair(5, 2, 0), PreconditionError);
    CHECK_THROWS_AS(sample_pair(7, 1, 0), PreconditionError);

    // Two sampled groups through the trichotomy end to end.
    for (uint64_t seed : {11ull, 12ull}) {
        FiniteGroup G = sample_pair(7, 2, seed).close();
        FirstReductionReport rep = first_reduction(G, 1, 1);
        INFO("seed " << seed << ": " << rep.str());
        CHECK(rep.case_found >= 1);
        CHECK(rep.case_found <= 3);
        CHECK(rep.verdict != Verdict::LemmaViolation);
        if (rep.case_found != 1) {
            REQUIRE(rep.T.has_value());
            CHECK(G.order() % rep.T->order() == 0);
            CHECK(G.order() / rep.T->order() == rep.index);
        }
    }
}
