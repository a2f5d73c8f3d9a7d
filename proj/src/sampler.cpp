#include "pinkforge/sampler.hpp"

#include <random>

#include "pinkforge/errors.hpp"

namespace pinkforge {

namespace {

uint64_t pow_u64(uint64_t b, unsigned e) {
    uint64_t r = 1;
    for (unsigned i = 0; i < e; ++i) r *= b;
    return r;
}

// Random product of unipotents: lands anywhere in SL2(Z/l^m) quickly and
// always has determinant 1.
Mat2 random_unimodular(uint64_t ell, unsigned m, std::mt19937_64& rng) {
    const uint64_t mod = pow_u64(ell, m);
    Mat2 g = Mat2::identity(ell, m);
    for (unsigned i = 0; i < 4; ++i) {
        const int64_t r = static_cast<int64_t>(rng() % mod);
        g = g * (i % 2 ? gen_L(ell, m, r) : gen_R(ell, m, r));
    }
    return g;
}

Mat2 random_depth1(uint64_t ell, unsigned m, std::mt19937_64& rng) {
    const uint64_t cof = pow_u64(ell, m - 1);
    Mat2 g = Mat2::identity(ell, m);
    for (unsigned i = 0; i < 4; ++i) {
        const int64_t a =
            static_cast<int64_t>(ell) * static_cast<int64_t>(rng() % cof);
        switch (rng() % 3) {
            case 0: g = g * gen_L(ell, m, a); break;
            case 1: g = g * gen_R(ell, m, a); break;
            default: g = g * gen_D(ell, m, a); break;
        }
    }
    return g;
}

} // namespace

GroupFile sample_proell(uint64_t ell, unsigned m, unsigned n,
                        unsigned gen_count, uint64_t seed) {
    if (ell < 2 || m < 2 || n == 0 || gen_count == 0)
        throw PreconditionError("sample_proell: need l >= 2, m >= 2, n >= 1, "
                                "gen_count >= 1");
    std::mt19937_64 rng(seed);
    std::vector<GroupElement> gens;
    for (unsigned i = 0; i < gen_count; ++i) {
        std::vector<Mat2> parts;
        for (unsigned f = 0; f < n; ++f) parts.push_back(random_depth1(ell, m, rng));
        gens.push_back(GroupElement(std::move(parts)));
    }
    return GroupFile::from_generators(gens, "proell-sample");
}

GroupFile sample_pair(uint64_t ell, unsigned m, uint64_t seed) {
    if (ell < 7 || m < 2)
        throw PreconditionError("sample_pair: need l >= 7 and m >= 2");
    std::mt19937_64 rng(seed);
    const uint64_t mod = pow_u64(ell, m);
    const unsigned family = static_cast<unsigned>(rng() % 7);

    const Mat2 C1 = random_unimodular(ell, m, rng);
    const Mat2 C2 = random_unimodular(ell, m, rng);
    const Mat2 M = random_unimodular(ell, m, rng);
    const Mat2 C1i = C1.inverse(), C2i = C2.inverse(), Mi = M.inverse();

    uint64_t u = 0;
    do {
        u = rng() % mod;
    } while (u % ell < 2 || u % ell == ell - 1);
    const PadicScalar us(ell, m, static_cast<int64_t>(u));
    const Mat2 torus(us, PadicScalar(ell, m, 0), PadicScalar(ell, m, 0),
                     us.inverse());
    const Mat2 weyl = Mat2::from_residues(ell, m, {0, 1, mod - 1, 0});

    auto graph_pair = [&](const Mat2& g) {
        return GroupElement({C1 * g * C1i, C2 * (M * g * Mi) * C2i});
    };
    auto side_pair = [&](const Mat2& g1, const Mat2& g2) {
        return GroupElement({C1 * g1 * C1i, C2 * g2 * C2i});
    };

    std::vector<GroupElement> gens;
    std::string label;
    const Mat2 id = Mat2::identity(ell, m);
    const int64_t le = static_cast<int64_t>(ell);
    switch (family) {
        case 0:
            label = "pair-full-graph";
            for (const Mat2& g : {gen_L(ell, m, 1), gen_R(ell, m, 1)})
                gens.push_back(graph_pair(g));
            break;
        case 1: {
            label = "pair-sign-graph";
            for (const Mat2& g : {gen_L(ell, m, 1), gen_R(ell, m, 1)})
                gens.push_back(graph_pair(g));
            const Mat2 nid = Mat2::from_residues(ell, m, {mod - 1, 0, 0, mod - 1});
            gens.push_back(side_pair(id, nid));
            break;
        }
        // the depth-1 D generator keeps each projection above B(1) even when
        // the sampled torus unit has prime-to-l order
        case 2:
            label = "pair-cartan-graph";
            for (const Mat2& g : {torus, gen_L(ell, m, le), gen_R(ell, m, le),
                                  gen_D(ell, m, le)})
                gens.push_back(graph_pair(g));
            break;
        case 3:
            label = "pair-normalizer-graph";
            for (const Mat2& g : {torus, weyl, gen_L(ell, m, le),
                                  gen_R(ell, m, le), gen_D(ell, m, le)})
                gens.push_back(graph_pair(g));
            break;
        case 4:
            label = "pair-borel-graph";
            for (const Mat2& g : {torus, gen_R(ell, m, 1), gen_L(ell, m, le)})
                gens.push_back(graph_pair(g));
            break;
        case 5:
            label = "pair-ball";
            for (const GroupElement& g : ball_generators(ell, m, {1, 1}))
                gens.push_back(side_pair(g.factor(0), g.factor(1)));
            break;
        default:
            label = "pair-easy";
            for (const GroupElement& g : ball_generators(ell, m, {1, 1}))
                gens.push_back(side_pair(g.factor(0), g.factor(1)));
            gens.push_back(side_pair(id, torus));
            break;
    }
    return GroupFile::from_generators(gens, label);
}

} // namespace pinkforge
