#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pinkforge/padic.hpp"

using namespace pinkforge;

TEST_CASE("constructor validates and reduces") {
    PadicScalar a(5, 3, 131);
    CHECK(a.residue() == 6);
    CHECK(a.modulus() == 125);
    PadicScalar b(5, 3, -1);
    CHECK(b.residue() == 124);
    CHECK_THROWS_AS(PadicScalar(6, 2, 1), DomainError);
    CHECK_THROWS_AS(PadicScalar(5, 0, 1), DomainError);
    // 5^27 > 2^61
    CHECK_THROWS_AS(PadicScalar(5, 27, 1), DomainError);
}

TEST_CASE("ring operations") {
    PadicScalar a(7, 2, 30), b(7, 2, 25);
    CHECK((a + b).residue() == 6);
    CHECK((a - b).residue() == 5);
    CHECK((a * b).residue() == (30 * 25) % 49);
    CHECK((-a).residue() == 19);
    CHECK(a != b);
    PadicScalar c(5, 2, 30);
    CHECK_THROWS_AS((void)(a + c), DomainError);
    PadicScalar d(7, 3, 30);
    CHECK_THROWS_AS((void)(a * d), DomainError);
    CHECK(d.truncated(2) == a);
}

TEST_CASE("valuation is capped at the precision") {
    CHECK(PadicScalar(5, 4, 50).valuation() == 2);
    CHECK(PadicScalar(5, 4, 0).valuation() == 4);
    CHECK(PadicScalar(5, 4, 3).valuation() == 0);
    CHECK(PadicScalar(2, 6, 48).valuation() == 4);
}

TEST_CASE("inverse of units") {
    PadicScalar a(5, 3, 6);
    CHECK((a * a.inverse()).residue() == 1);
    CHECK_THROWS_AS(PadicScalar(5, 3, 10).inverse(), DomainError);
    CHECK(pow_scalar(a, -2) == (a * a).inverse());
    CHECK(pow_scalar(a, 3).residue() == 216 % 125);
}

TEST_CASE("log of 1-units: pinned values") {
    // log_5(6) mod 5^3
    CHECK(log_unit(PadicScalar(5, 3, 6)).residue() == 55);
    // log_2(5) mod 2^6 and its valuation
    PadicScalar l5 = log_unit(PadicScalar(2, 6, 5));
    CHECK(l5.residue() == 60);
    CHECK(l5.valuation() == 2);
    CHECK(log_unit(PadicScalar(5, 3, 1)).is_zero());
}

TEST_CASE("exp: pinned values") {
    CHECK(exp_unit(PadicScalar(5, 3, 55)).residue() == 6);
    CHECK(exp_unit(PadicScalar(2, 5, 4)).residue() == 13);
    CHECK(exp_unit(PadicScalar(3, 4, 0)).residue() == 1);
}

TEST_CASE("log/exp domains") {
    CHECK_THROWS_AS(log_unit(PadicScalar(5, 3, 2)), DomainError);
    CHECK_THROWS_AS(log_unit(PadicScalar(2, 6, 3)), DomainError); // v(3-1)=1 < 2
    CHECK_THROWS_AS(exp_unit(PadicScalar(5, 3, 1)), DomainError);
    CHECK_THROWS_AS(exp_unit(PadicScalar(2, 6, 2)), DomainError);
}

TEST_CASE("log and exp are mutually inverse") {
    for (uint64_t ell : {3ull, 5ull, 7ull, 13ull}) {
        unsigned m = 5;
        uint64_t mod = 1;
        for (unsigned i = 0; i < m; ++i) mod *= ell;
        for (uint64_t k = 1; k < 40; k += 7) {
            PadicScalar x = PadicScalar(ell, m, static_cast<int64_t>((1 + ell * k) % mod));
            CHECK(exp_unit(log_unit(x)) == x);
            PadicScalar t = PadicScalar(ell, m, static_cast<int64_t>((ell * k) % mod));
            CHECK(log_unit(exp_unit(t)) == t);
        }
    }
    for (uint64_t k = 1; k < 30; k += 5) {
        PadicScalar x(2, 10, static_cast<int64_t>(1 + 4 * k));
        CHECK(exp_unit(log_unit(x)) == x);
        PadicScalar t(2, 10, static_cast<int64_t>(4 * k));
        CHECK(log_unit(exp_unit(t)) == t);
    }
}

TEST_CASE("log turns products into sums") {
    PadicScalar x(7, 5, 8), y(7, 5, 50);
    CHECK(log_unit(x * y) == log_unit(x) + log_unit(y));
    PadicScalar u(2, 9, 17), v(2, 9, 89);
    CHECK(log_unit(u * v) == log_unit(u) + log_unit(v));
}

TEST_CASE("exp shifts valuation onto the 1-unit") {
    PadicScalar t(5, 6, 5 * 5 * 7);
    CHECK((exp_unit(t) - PadicScalar(5, 6, 1)).valuation() == t.valuation());
    CHECK(log_unit(exp_unit(t)) == t);
}

TEST_CASE("teichmuller: pinned value and properties") {
    CHECK(teichmuller(PadicScalar(5, 2, 2)).residue() == 7);
    PadicScalar w = teichmuller(PadicScalar(7, 4, 3));
    CHECK(pow_scalar(w, 6).residue() == 1);
    CHECK(w.residue() % 7 == 3);
    PadicScalar a(5, 4, 2), b(5, 4, 3);
    CHECK(teichmuller(a * b) == teichmuller(a) * teichmuller(b));
    CHECK(teichmuller(PadicScalar(2, 5, 13)).residue() == 1);
    CHECK_THROWS_AS(teichmuller(PadicScalar(5, 3, 10)), DomainError);
}

TEST_CASE("raw helpers") {
    CHECK(is_prime_u64(2));
    CHECK(is_prime_u64(61));
    CHECK_FALSE(is_prime_u64(1));
    CHECK_FALSE(is_prime_u64(91));
    CHECK(mulmod_u64(uint64_t{1} << 40, uint64_t{1} << 40, (uint64_t{1} << 61) - 1) != 0);
    CHECK(powmod_u64(3, 100, 101) == 1);
    CHECK(invmod_u64(3, 125) == 42);
    CHECK_THROWS_AS(invmod_u64(5, 125), DomainError);
    CHECK(residue_valuation(0, 5, 3) == 3);
    CHECK(residue_valuation(75, 5, 6) == 2);
}
