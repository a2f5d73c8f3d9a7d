// pink-forge: front end for the subgroup analyses in libpinkforge.
//
//   pink-forge closure  --file G.group [--cap N] [--dump]
//   pink-forge lie      --file G.group
//   pink-forge classify --file G.group
//   pink-forge check <pink-proell|commutator|goursat|conj-saturate|
//                     graph-defect|first-reduction|main-theorem|identities>
//   pink-forge sample   --l L --m M [--n N] [--count C] [--seed S]
//
// Exit codes: 0 pass, 1 fail/violation, 2 resource, 3 usage.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pinkforge/catalog.hpp"
#include "pinkforge/dickson.hpp"
#include "pinkforge/errors.hpp"
#include "pinkforge/group.hpp"
#include "pinkforge/groupfile.hpp"
#include "pinkforge/modlattice.hpp"
#include "pinkforge/pink.hpp"
#include "pinkforge/sampler.hpp"

namespace {

constexpr const char* kVersion = "1.0.0";

using namespace pinkforge;

struct Options {
    std::string file;
    std::string format = "text";
    std::string catalog = "default";
    std::size_t cap = kDefaultGroupCap;
    uint64_t l = 0;
    unsigned m = 0;
    unsigned n = 1;
    unsigned k = 1;
    unsigned ball = 1;
    unsigned s1 = 1, s2 = 1, s = 1, t = 1;
    unsigned n1 = 1, n2 = 1;
    uint64_t seed = 0;
    unsigned count = 0;
    bool dump = false;
};

// Reports are key=value rows; text format adds a comment banner.
struct Report {
    std::vector<std::pair<std::string, std::string>> rows;

    void add(const std::string& k, const std::string& v) {
        rows.emplace_back(k, v);
    }
    void add_lines(const std::string& block) {
        std::istringstream in(block);
        std::string line;
        while (std::getline(in, line)) {
            const std::size_t eq = line.find('=');
            if (eq == std::string::npos)
                add("note", line);
            else
                add(line.substr(0, eq), line.substr(eq + 1));
        }
    }
    void print(const Options& opt) const {
        if (opt.format == "text")
            std::cout << "# pink-forge " << kVersion << "\n";
        for (const auto& [k, v] : rows) std::cout << k << "=" << v << "\n";
    }
};

Report base_report(const Options& opt, uint64_t l, unsigned m, unsigned n) {
    Report rep;
    rep.add("version", kVersion);
    rep.add("l", std::to_string(l));
    rep.add("m", std::to_string(m));
    rep.add("n", std::to_string(n));
    rep.add("cap", std::to_string(opt.cap));
    rep.add("verdicts", "Verified|InconclusiveAtPrecision|LemmaViolation");
    return rep;
}

int verdict_exit(Verdict v) {
    return v == Verdict::LemmaViolation ? 1 : 0;
}

FiniteGroup group_from_file(const Options& opt) {
    if (opt.file.empty())
        throw PreconditionError("this command needs --file");
    return GroupFile::load(opt.file).close(opt.cap);
}

// --file wins; otherwise the product ball B(ball,...,ball) at --l/--m/--n.
FiniteGroup group_from_flags(const Options& opt) {
    if (!opt.file.empty()) return group_from_file(opt);
    if (opt.l == 0 || opt.m == 0)
        throw PreconditionError("need --file or --l/--m");
    const std::vector<unsigned> levels(opt.n, opt.ball);
    return FiniteGroup::closure(ball_generators(opt.l, opt.m, levels), opt.cap);
}

int cmd_closure(const Options& opt) {
    const FiniteGroup G = group_from_file(opt);
    Report rep = base_report(opt, G.ell(), G.precision(), G.factors());
    rep.add("order", std::to_string(G.order()));
    if (opt.dump) {
        for (std::size_t i = 0; i < G.order(); ++i) {
            const GroupElement g = G.element(i);
            std::ostringstream row;
            for (unsigned f = 0; f < g.n(); ++f)
                for (uint64_t r : g.factor(f).residues())
                    row << (row.tellp() > 0 ? "," : "") << r;
            rep.add("elt", row.str());
        }
    }
    rep.print(opt);
    return 0;
}

int cmd_lie(const Options& opt) {
    const FiniteGroup G = group_from_file(opt);
    Report rep = base_report(opt, G.ell(), G.precision(), G.factors());
    const ModLattice L = lie_algebra(G);
    rep.add("lie", L.str());
    const std::optional<unsigned> k = least_scaled_basis_level(L);
    rep.add("k_found", k ? std::to_string(*k) : "none");
    rep.print(opt);
    return 0;
}

int cmd_classify(const Options& opt) {
    const FiniteGroup G = group_from_file(opt);
    Report rep = base_report(opt, G.ell(), G.precision(), G.factors());
    const FiniteGroup modl = reduction_image(G, 1);
    for (unsigned f = 0; f < G.factors(); ++f) {
        const SubgroupType ty = classify(project(modl, {f}));
        rep.add("factor" + std::to_string(f), ty.str());
    }
    rep.print(opt);
    return 0;
}

int check_pink_proell(const Options& opt) {
    const FiniteGroup G = group_from_flags(opt);
    Report rep = base_report(opt, G.ell(), G.precision(), G.factors());
    const PinkReport pr = pink_proell_check(G, opt.k);
    rep.add_lines(pr.str());
    rep.print(opt);
    return verdict_exit(pr.verdict);
}

int check_commutator(const Options& opt) {
    if (opt.l == 0 || opt.m == 0)
        throw PreconditionError("check commutator needs --l and --m");
    Report rep = base_report(opt, opt.l, opt.m, 1);
    const unsigned v = opt.l <= 3 ? 1 : 0;
    const unsigned target = opt.s1 + opt.s2 + v;
    rep.add("s1", std::to_string(opt.s1));
    rep.add("s2", std::to_string(opt.s2));
    rep.add("target_level", std::to_string(target));
    if (target >= opt.m) {
        rep.add("verdict", verdict_name(Verdict::InconclusiveAtPrecision));
        rep.add("detail", "target level at or above the precision");
        rep.print(opt);
        return 0;
    }
    const FiniteGroup C =
        comm_subgroup(ball_generators(opt.l, opt.m, {opt.s1}),
                      ball_generators(opt.l, opt.m, {opt.s2}), opt.cap);
    rep.add("comm_order", std::to_string(C.order()));
    const bool ok = contains_ball(C, {target});
    rep.add("verdict", verdict_name(ok ? Verdict::Verified
                                       : Verdict::LemmaViolation));
    rep.print(opt);
    return ok ? 0 : 1;
}

int check_goursat(const Options& opt) {
    if (opt.file.empty() && (opt.l == 0 || opt.m == 0))
        throw PreconditionError("check goursat needs --file or --l/--m/--n");
    GoursatReport gr;
    Report rep;
    const std::vector<std::vector<unsigned>> smat(
        opt.n, std::vector<unsigned>(opt.n, opt.s));
    if (!opt.file.empty()) {
        const FiniteGroup G = group_from_file(opt);
        rep = base_report(opt, G.ell(), G.precision(), G.factors());
        gr = goursat_combine(G, smat);
    } else {
        const BallProductOracle G(opt.l, opt.m,
                                  std::vector<unsigned>(opt.n, opt.ball));
        rep = base_report(opt, opt.l, opt.m, opt.n);
        gr = goursat_combine(G, smat);
    }
    rep.add_lines(gr.str());
    rep.add("verdict", verdict_name(gr.verified ? Verdict::Verified
                                                : Verdict::LemmaViolation));
    rep.print(opt);
    return gr.verified ? 0 : 1;
}

int check_conj_saturate(const Options& opt) {
    if (opt.l == 0 || opt.m == 0)
        throw PreconditionError("check conj-saturate needs --l and --m");
    Report rep = base_report(opt, opt.l, opt.m, 1);
    const unsigned v = opt.l == 2 ? 1 : 0;
    const unsigned target = opt.t + 4 * opt.s + 4 * v;
    rep.add("s", std::to_string(opt.s));
    rep.add("t", std::to_string(opt.t));
    rep.add("target_level", std::to_string(target));
    if (target >= opt.m) {
        rep.add("verdict", verdict_name(Verdict::InconclusiveAtPrecision));
        rep.add("detail", "target level at or above the precision");
        rep.print(opt);
        return 0;
    }
    const unsigned trials = opt.count ? opt.count : 20;
    std::mt19937_64 rng(opt.seed);
    uint64_t modt = 1;
    for (unsigned i = 0; i < opt.m - opt.t; ++i) modt *= opt.l;
    uint64_t scale = 1;
    for (unsigned i = 0; i < opt.t; ++i) scale *= opt.l;
    std::size_t passed = 0;
    for (unsigned i = 0; i < trials; ++i) {
        std::vector<uint64_t> row(3, 0);
        do {
            for (uint64_t& x : row) x = scale * (rng() % modt);
        } while (row[0] % (scale * opt.l) == 0 &&
                 row[1] % (scale * opt.l) == 0 &&
                 row[2] % (scale * opt.l) == 0);
        const ModLattice W = ModLattice::span(opt.l, opt.m, 3, {row});
        const ModLattice S = conj_saturate(W, opt.s, opt.t);
        if (S.contains_scaled_basis(target)) ++passed;
    }
    rep.add("trials", std::to_string(trials));
    rep.add("passed", std::to_string(passed));
    const bool ok = passed == trials;
    rep.add("verdict", verdict_name(ok ? Verdict::Verified
                                       : Verdict::LemmaViolation));
    rep.print(opt);
    return ok ? 0 : 1;
}

int check_graph_defect(const Options& opt) {
    const FiniteGroup G = group_from_file(opt);
    Report rep = base_report(opt, G.ell(), G.precision(), G.factors());
    rep.add("t", std::to_string(opt.t));
    const std::optional<GroupElement> w = graph_defect(G, opt.t);
    rep.add("defect", w ? "witness" : "none");
    if (w) rep.add("witness", w->str());
    rep.print(opt);
    return 0;
}

int check_first_reduction(const Options& opt) {
    const FiniteGroup G = group_from_file(opt);
    Report rep = base_report(opt, G.ell(), G.precision(), G.factors());
    const FirstReductionReport fr = first_reduction(G, opt.n1, opt.n2);
    rep.add_lines(fr.str());
    rep.print(opt);
    return verdict_exit(fr.verdict);
}

int check_main_theorem(const Options& opt) {
    const FiniteGroup G = group_from_flags(opt);
    Report rep = base_report(opt, G.ell(), G.precision(), G.factors());
    const PinkReport pr = main_theorem_harness(G, opt.k);
    rep.add_lines(pr.str());
    rep.print(opt);
    return verdict_exit(pr.verdict);
}

int check_identities(const Options& opt) {
    if (opt.l == 0 || opt.m == 0)
        throw PreconditionError("check identities needs --l and --m");
    const IdentityCatalog cat = opt.catalog == "default"
                                    ? IdentityCatalog::builtin()
                                    : IdentityCatalog::load(opt.catalog);
    Report rep = base_report(opt, opt.l, opt.m, 1);
    const std::size_t trials = opt.count ? opt.count : 25;
    std::size_t failures = 0;
    for (const IdentityRunResult& r :
         run_catalog(cat, opt.l, opt.m, trials, opt.seed)) {
        rep.add("identity." + r.name,
                r.failures == 0 ? "pass" : "fail(" +
                                               std::to_string(r.failures) +
                                               "/" +
                                               std::to_string(r.trials) + ")");
        failures += r.failures;
    }
    rep.add("failures", std::to_string(failures));
    rep.print(opt);
    return failures == 0 ? 0 : 1;
}

int cmd_sample(const Options& opt) {
    if (opt.l == 0 || opt.m == 0)
        throw PreconditionError("sample needs --l and --m");
    Report rep = base_report(opt, opt.l, opt.m, opt.n);
    const unsigned count = opt.count ? opt.count : 1;
    for (unsigned i = 0; i < count; ++i) {
        const uint64_t seed = opt.seed + i;
        const GroupFile gf = opt.n == 2 && opt.l >= 7
                                 ? sample_pair(opt.l, opt.m, seed)
                                 : sample_proell(opt.l, opt.m, opt.n, 3, seed);
        std::ostringstream name;
        name << "sample-l" << opt.l << "-m" << opt.m << "-n" << opt.n << "-s"
             << seed << ".group";
        gf.save(name.str());
        rep.add("wrote", name.str());
    }
    rep.print(opt);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"subgroup analyses in SL2(Z/l^m)^n"};
    app.require_subcommand(1);

    Options opt;
    if (const char* env = std::getenv("PINK_FORGE_CAP"))
        opt.cap = static_cast<std::size_t>(std::strtoull(env, nullptr, 10));

    auto add_common = [&](CLI::App* c) {
        c->add_option("--file", opt.file, "group file to load");
        c->add_option("--cap", opt.cap, "element cap for enumeration");
        c->add_option("--l", opt.l, "prime l");
        c->add_option("--m", opt.m, "precision (power of l)");
        c->add_option("--n", opt.n, "number of factors");
        c->add_option("--k", opt.k, "hypothesis level k");
        c->add_option("--seed", opt.seed, "random seed");
        c->add_option("--format", opt.format, "text|machine")
            ->check(CLI::IsMember({"text", "machine"}));
    };

    CLI::App* closure = app.add_subcommand("closure", "enumerate a group");
    add_common(closure);
    closure->add_flag("--dump", opt.dump, "print every element");

    CLI::App* lie = app.add_subcommand("lie", "Lie algebra of a group");
    add_common(lie);

    CLI::App* classify = app.add_subcommand("classify", "mod-l factor types");
    add_common(classify);

    CLI::App* check = app.add_subcommand("check", "run a named check");
    std::string which;
    check->add_option("name", which, "check name")
        ->required()
        ->check(CLI::IsMember({"pink-proell", "commutator", "goursat",
                               "conj-saturate", "graph-defect",
                               "first-reduction", "main-theorem",
                               "identities"}));
    add_common(check);
    check->add_option("--ball", opt.ball, "ball level when no --file");
    check->add_option("--s1", opt.s1, "first commutator level");
    check->add_option("--s2", opt.s2, "second commutator level");
    check->add_option("--s", opt.s, "pairwise/conjugation level");
    check->add_option("--t", opt.t, "depth/defect level");
    check->add_option("--n1", opt.n1, "first-factor ball level");
    check->add_option("--n2", opt.n2, "second-factor ball level");
    check->add_option("--count", opt.count, "trial count");
    check->add_option("--catalog", opt.catalog, "identity catalog path");

    CLI::App* sample = app.add_subcommand("sample", "emit random group files");
    add_common(sample);
    sample->add_option("--count", opt.count, "number of files");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 3;
    }

    try {
        if (closure->parsed()) return cmd_closure(opt);
        if (lie->parsed()) return cmd_lie(opt);
        if (classify->parsed()) return cmd_classify(opt);
        if (sample->parsed()) return cmd_sample(opt);
        if (which == "pink-proell") return check_pink_proell(opt);
        if (which == "commutator") return check_commutator(opt);
        if (which == "goursat") return check_goursat(opt);
        if (which == "conj-saturate") return check_conj_saturate(opt);
        if (which == "graph-defect") return check_graph_defect(opt);
        if (which == "first-reduction") return check_first_reduction(opt);
        if (which == "main-theorem") return check_main_theorem(opt);
        if (which == "identities") return check_identities(opt);
        std::cerr << "error=unknown check\n";
        return 3;
    } catch (const CapExceeded& e) {
        std::cerr << "error=cap: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "error=parse: " << e.what() << "\n";
        return 3;
    } catch (const PreconditionError& e) {
        std::cerr << "error=precondition: " << e.what() << "\n";
        return 3;
    } catch (const DomainError& e) {
        std::cerr << "error=domain: " << e.what() << "\n";
        return 3;
    } catch (const LemmaViolation& e) {
        std::cerr << "error=lemma-violation: " << e.what() << "\n";
        return 1;
    } catch (const HypothesisUnmet& e) {
        std::cerr << "error=hypothesis-unmet: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error=internal: " << e.what() << "\n";
        return 1;
    }
}
