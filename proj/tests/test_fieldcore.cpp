#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "deltap/fp.hpp"
#include "deltap/padic.hpp"

using namespace deltap;

TEST_CASE("fp_inv on pinned values") {
    CHECK(fp_inv(Fp(1, 5)).value() == 1);
    // Exhaustive oracle: the inverse is the unique y with x*y = 1.
    for (uint64_t p : {5ull, 7ull}) {
        for (uint64_t x = 1; x < p; ++x) {
            uint64_t y = 0;
            for (uint64_t c = 1; c < p; ++c)
                if (x * c % p == 1) y = c;
            CHECK(fp_inv(Fp::raw(x, p)).value() == y);
        }
    }
    CHECK(fp_inv(Fp(2, 5)).value() == 3);
    CHECK(fp_inv(Fp(3, 7)).value() == 5);
    CHECK_THROWS_AS(fp_inv(Fp(0, 5)), math_error);
}

TEST_CASE("fp involution and product laws") {
    for (uint64_t p : {5ull, 7ull, 97ull}) {
        for (uint64_t x = 1; x < p; ++x) {
            Fp v = Fp::raw(x, p);
            CHECK(fp_inv(fp_inv(v)) == v);
            CHECK((v * fp_inv(v)).value() == 1);
        }
    }
}

TEST_CASE("padic pinned examples") {
    // p * 1 times p * 4 has valuation 2 and unit 4.
    Padic a = Padic(5, 5) * Padic(1, 5);
    Padic b = Padic(20, 5);
    Padic prod = a * b;
    CHECK(prod.valuation() == 2);
    CHECK(prod.unit() % 5 == 4);

    Padic two = Padic(1, 5) + Padic(1, 5);
    CHECK(two.valuation() == 0);
    CHECK(two.unit() % 25 == 2);

    Padic six = Padic(6, 5);
    Padic sixth = Padic(1, 5) / six;
    CHECK((six * sixth).agrees_with(Padic(1, 5)));
}

TEST_CASE("padic arithmetic laws at equal precision") {
    std::mt19937_64 rng(20260810);
    for (int trial = 0; trial < 200; ++trial) {
        int64_t x = static_cast<int64_t>(rng() % 4000) - 2000;
        int64_t y = static_cast<int64_t>(rng() % 4000) - 2000;
        int64_t z = static_cast<int64_t>(rng() % 4000) - 2000;
        Padic a(x, 5), b(y, 5), c(z, 5);
        CHECK((a * b).agrees_with(b * a));
        CHECK(((a * b) * c).agrees_with(a * (b * c)));
        CHECK((a + b).agrees_with(b + a));
        if (x != 0 && y != 0)
            CHECK((a * b).valuation() == a.valuation() + b.valuation());
    }
}

TEST_CASE("padic_arith dispatch") {
    Padic a(6, 5), b(2, 5);
    CHECK(padic_arith(a, b, PadicOp::add).agrees_with(Padic(8, 5)));
    CHECK(padic_arith(a, b, PadicOp::mul).agrees_with(Padic(12, 5)));
    CHECK(padic_arith(a, b, PadicOp::div).agrees_with(Padic(3, 5)));
    CHECK_THROWS_AS(padic_arith(a, Padic::exact_zero(5), PadicOp::div), math_error);
}

TEST_CASE("padic cancellation produces a zero class") {
    Padic a(7, 5);
    Padic diff = a - a;
    CHECK(diff.is_zero_class());
    CHECK(diff.valuation_at_least() >= 12);
    CHECK_THROWS_AS(diff.unit(), math_error);
    CHECK_THROWS_AS(Padic(1, 5) / diff, math_error);
    CHECK_THROWS_AS(Padic(3, 5) / Padic::exact_zero(5), math_error);
}

TEST_CASE("padic valuation cap") {
    Padic p1 = Padic::from_rational(1, 625, 5); // 5^-4, at the cap
    CHECK(p1.valuation() == -4);
    CHECK_THROWS_AS(Padic::from_rational(1, 3125, 5), math_error);
}

TEST_CASE("delta_rational pinned values") {
    CHECK(delta_rational(1, 1, 5).value() == 0);

    // (2 - 2^5)/5 = -6 = 4 mod 5, and the generic mod-25 evaluation agrees.
    CHECK(delta_rational(2, 1, 5).value() == 4);
    {
        int64_t x = 6 % 25;
        int64_t xp = 1;
        for (int i = 0; i < 5; ++i) xp = xp * x % 25;
        int64_t expect = ((x - xp + 25) % 25) / 5;
        CHECK(delta_rational(6, 1, 5).value() == static_cast<uint64_t>(expect % 5));
    }

    // l = 1 mod p^2 makes delta(l) vanish; 101 = 1 + 4*25.
    CHECK(delta_rational(101, 1, 5).value() == 0);
    CHECK(delta_rational(1, 101, 5).value() == 0);

    CHECK_THROWS_AS(delta_rational(10, 1, 5), math_error);
    CHECK_THROWS_AS(delta_rational(3, 25, 5), math_error);
}

// The p-derivation sum rule specialized to rational units:
// delta(x+y) = delta x + delta y - sum_{j=1}^{p-1} (1/p) C(p,j) x^j y^{p-j} mod p.
TEST_CASE("delta_rational satisfies the p-derivation sum rule") {
    std::mt19937_64 rng(424242);
    for (uint64_t p : {5ull, 7ull}) {
        uint64_t p2 = p * p;
        for (int trial = 0; trial < 50; ++trial) {
            int64_t x = 1 + static_cast<int64_t>(rng() % 200);
            int64_t y = 1 + static_cast<int64_t>(rng() % 200);
            if (x % static_cast<int64_t>(p) == 0) ++x;
            if (y % static_cast<int64_t>(p) == 0) ++y;
            if ((x + y) % static_cast<int64_t>(p) == 0) continue;

            Fp lhs = delta_rational(x + y, 1, p);

            // Correction term sum_{j} C(p,j)/p x^j y^{p-j} computed mod p
            // from exact binomials (C(p,j) is divisible by p for 0<j<p).
            uint64_t corr = 0;
            uint64_t binom = 1; // C(p, j) built incrementally, exact in u64/u128
            for (uint64_t j = 1; j < p; ++j) {
                binom = static_cast<uint64_t>(
                    static_cast<unsigned __int128>(binom) * (p - j + 1) / j);
                uint64_t cb = (binom / p) % p;
                uint64_t xj = fpmod::pow(fpmod::from_int(x, p), j, p);
                uint64_t ypj = fpmod::pow(fpmod::from_int(y, p), p - j, p);
                corr = fpmod::add(corr, fpmod::mul(cb, fpmod::mul(xj, ypj, p), p), p);
            }
            Fp rhs = delta_rational(x, 1, p) + delta_rational(y, 1, p) - Fp::raw(corr, p);
            CHECK(lhs == rhs);
            (void)p2;
        }
    }
}
