#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "deltap/deltaseries.hpp"

using namespace deltap;

namespace {

LaurentSeries random_series(std::mt19937_64& rng, uint64_t p, int64_t low, int64_t prec) {
    std::vector<uint32_t> c(static_cast<size_t>(prec - low));
    for (auto& v : c) v = static_cast<uint32_t>(rng() % p);
    return {p, low, prec, std::move(c)};
}

DeltaSeries1 random_delta(std::mt19937_64& rng, uint64_t p, int64_t prec,
                          int64_t mprime_top = 2, bool holomorphic = false) {
    DeltaSeries1 f(p);
    for (int64_t m = 0; m <= mprime_top; ++m) {
        int64_t lo = holomorphic ? static_cast<int64_t>(p) * m : -3;
        f.set_component(m, random_series(rng, p, lo, prec));
    }
    return f;
}

DeltaSeries1 psi_power(uint64_t p, int64_t mprime, int64_t prec) {
    DeltaSeries1 f(p);
    f.set_component(mprime, LaurentSeries::monomial(p, 0, Fp(1, p), prec));
    return f;
}

} // namespace

TEST_CASE("basis conversion round trip") {
    // q'/q^p corresponds to the plain monomial q^{-p} (q')^1.
    auto psi = psi_power(5, 1, 20);
    auto mono = to_monomial_basis(psi);
    CHECK(mono.comp.at(1).low() == -5);
    CHECK(mono.comp.at(1).coeff(-5).value() == 1);
    CHECK(from_monomial_basis(mono).agrees_with(psi));

    std::mt19937_64 rng(21);
    for (int t = 0; t < 20; ++t) {
        auto f = random_delta(rng, 5, 15);
        CHECK(from_monomial_basis(to_monomial_basis(f)).agrees_with(f));
    }

    // V(phi) (q'/q^p) for phi = q sits at a_{0,1} = 1.
    DeltaSeries1 f(5);
    f.set_component(1, v_classical(LaurentSeries::monomial(5, 1, Fp(1, 5), 4)));
    auto m = to_monomial_basis(f);
    CHECK(m.comp.at(1).coeff(0).value() == 1);
}

TEST_CASE("hecke_delta basics") {
    std::mt19937_64 rng(22);
    auto f = random_delta(rng, 5, 40);
    CHECK(hecke_delta(f, 1, 3, 11).agrees_with(f));
    CHECK_THROWS_AS(hecke_delta(f, 5, 3, 11), math_error);

    // Single component f_1 = V(phi) with phi an eigenform:
    // T_kappa(n) f = (lambda_n / n) f: the componentwise eigen condition.
    auto a = divisor_sum_coeffs(11, 300);
    auto sys = EigenSystem::from_provider(a, 5, 11, 0);
    auto phi = a.series_mod(5, 60);
    DeltaSeries1 g(5);
    g.set_component(1, v_classical(phi));
    for (int64_t n : {2, 3}) {
        auto lhs = hecke_delta(g, n, 0, 11);
        auto rhs = g.scaled(sys.lambda_at(n) / Fp(n, 5));
        CHECK(lhs.agrees_with(rhs));
    }
}

TEST_CASE("hecke_delta agrees with the monomial-basis route") {
    std::mt19937_64 rng(23);
    {
        // T(1) is the identity on the monomial route as well.
        auto f = random_delta(rng, 5, 30);
        auto mono = to_monomial_basis(f);
        CHECK(from_monomial_basis(hecke_delta_monomial(mono, 1, 3, 11)).agrees_with(f));
    }
    for (uint64_t p : {5ull, 7ull}) {
        for (int t = 0; t < 100; ++t) {
            auto f = random_delta(rng, p, 30);
            int64_t n = (t % 3 == 0) ? 2 : (t % 3 == 1 ? 3 : 6);
            if (n % static_cast<int64_t>(p) == 0) n = 2;
            int64_t kappa = static_cast<int64_t>(rng() % 5);
            auto via_psi = hecke_delta(f, n, kappa, 11);
            auto via_mono =
                from_monomial_basis(hecke_delta_monomial(to_monomial_basis(f), n, kappa, 11));
            CHECK(via_psi.agrees_with(via_mono));
        }
    }
}

TEST_CASE("hecke_delta multiplicativity and Frobenius commutation") {
    std::mt19937_64 rng(24);
    for (int t = 0; t < 20; ++t) {
        auto f = random_delta(rng, 5, 60);
        auto lhs = hecke_delta(hecke_delta(f, 2, 1, 11), 3, 1, 11);
        CHECK(lhs.agrees_with(hecke_delta(f, 6, 1, 11)));

        for (auto which : {Frobenius::F, Frobenius::F_k, Frobenius::F_rel}) {
            auto a = hecke_delta(frobenii(f, which), 2, 1, 11);
            auto b = frobenii(hecke_delta(f, 2, 1, 11), which);
            CHECK(a.agrees_with(b));
        }
    }
}

TEST_CASE("frobenii") {
    auto psi = psi_power(5, 1, 30);
    CHECK(frobenii(psi, Frobenius::F_rel).agrees_with(psi_power(5, 5, 150)));
    CHECK(frobenii(psi, Frobenius::F_k).agrees_with(psi));

    DeltaSeries1 f(5);
    f.set_component(1, v_classical(LaurentSeries::monomial(5, 1, Fp(2, 5), 6)));
    auto img = frobenii(f, Frobenius::F_rel);
    CHECK(img.component(5) != nullptr);
    CHECK(img.component(5)->coeff(25).value() == 2);
}

TEST_CASE("v_delta kills q'") {
    auto psi = psi_power(5, 1, 30);
    CHECK(v_delta(psi).is_zero());
    CHECK(!frobenii(psi, Frobenius::F_rel).is_zero()); // V != F_rel witnessed on q'/q^p

    auto phi = LaurentSeries::monomial(5, 2, Fp(3, 5), 10);
    CHECK(v_delta(DeltaSeries1::from_order0(phi))
              .agrees_with(DeltaSeries1::from_order0(v_classical(phi))));

    std::mt19937_64 rng(25);
    for (int t = 0; t < 10; ++t) {
        auto f = random_delta(rng, 5, 20);
        auto vv = v_delta(v_delta(f));
        CHECK(vv.agrees_with(DeltaSeries1::from_order0(
            v_classical(v_classical(f.component_or_zero(0, 20))))));
    }
}

TEST_CASE("theta1") {
    auto g = DeltaSeries1::from_order0(LaurentSeries::monomial(5, 3, Fp(2, 5), 10));
    CHECK(theta1(g).is_zero());

    auto psi = psi_power(5, 1, 30);
    CHECK(theta1(psi).agrees_with(
        DeltaSeries1::from_order0(LaurentSeries::monomial(5, 0, Fp(1, 5), 30))));

    // Derivation property on random pairs.
    std::mt19937_64 rng(26);
    for (int t = 0; t < 25; ++t) {
        auto f = random_delta(rng, 5, 15, 1);
        auto g2 = random_delta(rng, 5, 15, 1);
        auto lhs = theta1(f * g2);
        auto rhs = theta1(f) * g2 + f * theta1(g2);
        CHECK(lhs.agrees_with(rhs));
    }
}

TEST_CASE("is_primitive") {
    DeltaSeries1 f(5);
    f.set_component(0, LaurentSeries::monomial(5, 3, Fp(1, 5), 20) +
                           LaurentSeries::monomial(5, 7, Fp(2, 5), 20));
    CHECK(is_primitive(f));
    f.set_component(0, LaurentSeries::monomial(5, 5, Fp(1, 5), 20));
    CHECK(!is_primitive(f));
}

TEST_CASE("echelon_shape_check") {
    // Order-0 series: accepted with empty family.
    auto f0 = DeltaSeries1::from_order0(LaurentSeries::monomial(5, 2, Fp(1, 5), 20));
    auto fam = echelon_shape_check(f0);
    REQUIRE(fam.has_value());
    CHECK(fam->phi.empty());

    // q (q'/q^p): the coefficient q is not in the image of V.
    DeltaSeries1 f1(5);
    f1.set_component(1, LaurentSeries::monomial(5, 6, Fp(1, 5), 30));
    int64_t offender = 0;
    CHECK(!echelon_shape_check(f1, &offender).has_value());
    CHECK(offender == 1);

    // V(q) (q'/q^p) = q^p (q'/q^p): accepted with phi_1 = q.
    DeltaSeries1 f2(5);
    f2.set_component(1, LaurentSeries::monomial(5, 5, Fp(1, 5), 30));
    auto fam2 = echelon_shape_check(f2);
    REQUIRE(fam2.has_value());
    CHECK(fam2->phi.at(1).agrees_with(LaurentSeries::monomial(5, 1, Fp(1, 5), 6)));

    // q^{m0} (q')^{m'} with v_p(m0) <= v_p(m') violates the echelon
    // shape (here m0 = m' = 1, plain monomial q q').
    MonomialSeries1 mono{5, {}};
    mono.comp.insert_or_assign(1, LaurentSeries::monomial(5, 1, Fp(1, 5), 30));
    CHECK(!echelon_shape_check(from_monomial_basis(mono)).has_value());

    CHECK_THROWS_AS(echelon_shape_check(psi_power(5, 1, 10)), math_error);
}

TEST_CASE("order-2 Hecke: m''=0 components reproduce the order-1 action") {
    std::mt19937_64 rng(27);
    for (int t = 0; t < 25; ++t) {
        auto f = random_delta(rng, 5, 40);
        auto f2 = DeltaSeries2::from_order1(f);
        for (int64_t n : {2, 3}) {
            auto lhs = hecke_delta_order2(f2, n, 2, 11);
            auto rhs = DeltaSeries2::from_order1(hecke_delta(f, n, 2, 11));
            CHECK(lhs.agrees_with(rhs));
        }
    }
}

TEST_CASE("order-2 Hecke: prime l = 1 mod p^2 leaves only the q'' term") {
    // n = 101 = 1 + 4*25: delta(A/D) = 0 and A/D = 1 in F_5 for both
    // divisor pairs, so the bracket collapses to q''/q^{p^2}.
    DeltaSeries2 f(5);
    f.set_component(0, 1, LaurentSeries::monomial(5, 101, Fp(1, 5), 350));
    auto out = hecke_delta_order2(f, 101, 2, 11);
    DeltaSeries2 expect(5);
    expect.set_component(0, 1, LaurentSeries::monomial(5, 1, Fp(1, 5), 3));
    CHECK(out.agrees_with(expect));
}

TEST_CASE("order-2 Hecke against a hand-expanded bracket") {
    // Input (q''/q^{25}) q^2, n = 2, N = 11, kappa = 2, p = 5.
    // (A,D) = (1,2): head = 3, b2 = 3, b3 = 1, lands at q^1.
    // (A,D) = (2,1): head = 4, b2 = 2, b3 = 3, lands at q^4.
    DeltaSeries2 f(5);
    f.set_component(0, 1, LaurentSeries::monomial(5, 2, Fp(1, 5), 40));
    auto out = hecke_delta_order2(f, 2, 2, 11);

    DeltaSeries2 expect(5);
    auto mono = [](int64_t e, int64_t c) { return LaurentSeries::monomial(5, e, Fp(c, 5), 20); };
    expect.set_component(0, 1, mono(1, 3) + mono(4, 4));
    expect.set_component(5, 0, mono(1, 4) + mono(4, 3));
    expect.set_component(10, 0, mono(1, 3) + mono(4, 2));
    CHECK(out.agrees_with(expect));
}
