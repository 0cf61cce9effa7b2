#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "deltap/eigen.hpp"

using namespace deltap;

namespace {

struct Setup {
    CoeffProvider a;
    EigenSystem sys;
    LaurentSeries phi;
};

Setup divisor_setup(int64_t prec = 60) {
    auto a = divisor_sum_coeffs(11, 300);
    auto sys = EigenSystem::from_provider(a, 5, 11, 0);
    auto phi = a.series_mod(5, prec);
    return {std::move(a), std::move(sys), std::move(phi)};
}

} // namespace

TEST_CASE("sharp2 component structure") {
    auto [a, sys, phi] = divisor_setup();

    // kappa = 0 with lambda_p = a_5 = 1: components {0, 1, 5}, and the
    // m' = 1 part is -V(phi).
    auto f = sharp2(sys, phi);
    CHECK(f.component(0) != nullptr);
    CHECK(f.component(1) != nullptr);
    CHECK(f.component(5) != nullptr);
    CHECK(f.component(1)->agrees_with(v_classical(phi).scaled(Fp(-1, 5))));
    CHECK(f.component(0)->agrees_with(theta_inv_part(phi)));

    // kappa > 0 kills the p-component.
    EigenSystem sys1 = sys;
    sys1.kappa = 1;
    auto f1 = sharp2(sys1, phi);
    CHECK(f1.component(5) == nullptr);
    CHECK(f1.component(1) != nullptr);

    // lambda_p = 0 and kappa > 0 degenerate to phi^(-1).
    EigenSystem sys2 = sys1;
    sys2.lambda_p = Fp(0, 5);
    auto f2 = sharp2(sys2, phi);
    CHECK(f2.mprime_top() == 0);
    CHECK(f2.component(0)->agrees_with(theta_inv_part(phi)));

    CHECK_THROWS_AS(sharp2(sys, theta(phi), true), math_error);
}

TEST_CASE("sharp2 is primitive, Taylor symmetric, and an eigenvector") {
    auto [a, sys, phi] = divisor_setup();
    auto f = sharp2(sys, phi, true, {2, 3, 7});

    CHECK(is_primitive(f));
    auto prof = structure_decompose(f);
    REQUIRE(prof.has_value());
    CHECK(prof->taylor);

    auto rep = eigen_check_delta(f, sys, default_n_list(sys, 60));
    CHECK(rep.all_pass());

    // The componentwise route to the same fact.
    CHECK(ptp_eigen_conditions(f, sys.kappa, sys.lambda_p).all_pass());

    // theta_1 bridge: theta_1(phi^sharp2) = -lambda_p V(phi).
    auto th = theta1(f);
    CHECK(th.agrees_with(
        DeltaSeries1::from_order0(v_classical(phi).scaled(-sys.lambda_p))));

    // Both Hecke routes agree on it.
    for (int64_t n : {2, 3, 6}) {
        auto lhs = hecke_delta(f, n, sys.kappa, sys.N);
        auto rhs = from_monomial_basis(
            hecke_delta_monomial(to_monomial_basis(f), n, sys.kappa, sys.N));
        CHECK(lhs.agrees_with(rhs));
    }
}

TEST_CASE("eigen_check_delta rejects and accepts as it should") {
    auto [a, sys, phi] = divisor_setup();
    auto f = sharp2(sys, phi);

    // Scaling by a unit keeps the eigenvector property.
    CHECK(eigen_check_delta(f.scaled(Fp(3, 5)), sys, {2, 3}).all_pass());

    // A constant passes exactly when (oprit) holds; break it via lambda_p.
    auto c = DeltaSeries1::from_order0(LaurentSeries::monomial(5, 0, Fp(2, 5), 40));
    CHECK(eigen_check_delta(c, sys, {2, 3}).all_pass());
    EigenSystem bad = sys;
    bad.lambda_p = Fp(2, 5);
    CHECK(!eigen_check_delta(c, bad, {2, 3}).all_pass());

    // Non-symmetric input is a hard error.
    DeltaSeries1 ns(5);
    ns.set_component(1, LaurentSeries::monomial(5, 6, Fp(1, 5), 30));
    CHECK_THROWS_AS(eigen_check_delta(ns, sys, {2}), math_error);
}

TEST_CASE("sharp1 identities") {
    auto [a, sys, phi] = divisor_setup();
    auto s1 = sharp1(sys, phi);
    auto s2 = sharp2(sys, phi).truncated(60);

    // F_rel(phi^sharp1) - lambda_p phi^sharp1 + lambda_p phi^sharp2 = 0:
    // the telescoping identity of the geometric Frobenius sum.  (Its order-0
    // shadow is the same statement with V.)
    auto lhs = frobenii(s1, Frobenius::F_rel).truncated(60) - s1.scaled(sys.lambda_p) +
               s2.scaled(sys.lambda_p);
    CHECK(lhs.truncated(60).is_zero());

    // Alternative form: (sum lambda_p^{-i} V^i) phi^(-1) - lambda_p V(phi) Psi.
    LaurentSeries qpart = LaurentSeries::zero(5, 60);
    LaurentSeries term = theta_inv_part(phi);
    Fp scale(1, 5);
    while (!term.truncated(60).is_zero()) {
        qpart = qpart + term.truncated(60).scaled(scale);
        term = v_classical(term);
        scale = scale / sys.lambda_p;
    }
    DeltaSeries1 alt(5);
    alt.set_component(0, qpart);
    alt.add_to_component(1, v_classical(phi).scaled(-sys.lambda_p).truncated(60));
    CHECK(s1.agrees_with(alt));

    // Same eigenvalues.
    CHECK(eigen_check_delta(s1, sys, default_n_list(sys, 60)).all_pass());

    // Only defined in case 3.
    EigenSystem k1 = sys;
    k1.kappa = 2;
    CHECK_THROWS_AS(sharp1(k1, phi), math_error);
    EigenSystem l0 = sys;
    l0.lambda_p = Fp(0, 5);
    CHECK_THROWS_AS(sharp1(l0, phi), math_error);
}

TEST_CASE("decompose_eigenform pinned cases") {
    auto [a, sys, phi] = divisor_setup();
    auto f = sharp2(sys, phi).truncated(60);

    auto dec = decompose_eigenform(f, sys);
    CHECK(dec.c.is_zero());
    REQUIRE(dec.c_list.size() >= 3);
    CHECK(dec.c_list[0].value() == 1);
    CHECK(dec.c_list[1].is_zero());
    CHECK(dec.c_list[2].is_zero());
    CHECK(dec.phi.agrees_with(phi));
    CHECK(dec.tail_relation_verified);

    // 2 F_rel(sharp2) + 3 sharp2 -> c_0 = 3, c_1 = 2.
    auto g = (frobenii(f.with_mprime_max(30), Frobenius::F_rel).scaled(Fp(2, 5)) +
              f.scaled(Fp(3, 5)))
                 .truncated(60);
    auto dec2 = decompose_eigenform(g, sys);
    CHECK(dec2.c.is_zero());
    CHECK(dec2.c_list[0].value() == 3);
    CHECK(dec2.c_list[1].value() == 2);
    CHECK(dec2.c_list[2].is_zero());

    // phi^sharp1 decomposes with c_i = lambda_p^{-i}.
    auto s1 = sharp1(sys, phi);
    auto dec3 = decompose_eigenform(s1, sys);
    Fp linv = sys.lambda_p.inv();
    Fp expect(1, 5);
    for (size_t i = 0; i < dec3.c_list.size(); ++i) {
        CHECK(dec3.c_list[i] == expect);
        expect = expect * linv;
    }

    // The zero order-0 part and constants are rejected.
    CHECK_THROWS_AS(decompose_eigenform(DeltaSeries1(5), sys), math_error);
    auto cst = DeltaSeries1::from_order0(LaurentSeries::monomial(5, 0, Fp(1, 5), 40));
    CHECK_THROWS_AS(decompose_eigenform(cst, sys), math_error);
}

TEST_CASE("decompose_eigenform round trip on random data") {
    auto [a, sys, phi] = divisor_setup();
    std::mt19937_64 rng(41);
    for (int t = 0; t < 25; ++t) {
        Fp c = Fp::raw(rng() % 5, 5);
        std::vector<Fp> cs;
        for (int i = 0; i < 4; ++i) cs.push_back(Fp::raw(rng() % 5, 5));
        if (cs[0].is_zero() && cs[1].is_zero() && cs[2].is_zero()) cs[0] = Fp(1, 5);
        auto f = reconstruct_eigenform(sys, phi, c, cs);
        auto dec = decompose_eigenform(f, sys);
        CHECK(dec.c == c);
        // p^3 = 125 is beyond prec 60; only c_0..c_2 are recoverable.
        REQUIRE(dec.c_list.size() == 3);
        for (size_t i = 0; i < 3; ++i) CHECK(dec.c_list[i] == cs[i]);
        CHECK(reconstruct_eigenform(sys, dec.phi, dec.c, dec.c_list).agrees_with(f));
    }
}

TEST_CASE("classify_case trichotomy") {
    auto [a, sys, phi] = divisor_setup();
    EigenSystem s = sys;

    s.kappa = 3;
    s.lambda_p = Fp(0, 5);
    CHECK(classify_case(s).which == EigenCase::phi_inv_basis);

    s.kappa = 0;
    CHECK(classify_case(s).which == EigenCase::sharp2_basis);
    s.kappa = 2;
    s.lambda_p = Fp(1, 5);
    CHECK(classify_case(s).which == EigenCase::sharp2_basis);

    s.kappa = 0;
    CHECK(classify_case(s).which == EigenCase::sharp1_basis);
    CHECK(classify_case(s).basis == "phi^sharp1");
}
