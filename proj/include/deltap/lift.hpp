#pragma once

#include <array>
#include <map>

#include "deltap/deltaseries.hpp"
#include "deltap/padic.hpp"
#include "deltap/qseries.hpp"

namespace deltap {

// Characteristic-zero verification layer: build
//   f^{#,2} = (1/p) sum_{n>=1} (a_n/n) (p^kappa phi^2(q)^n - a_p phi(q)^n + p q^n)
// over capped-precision p-adics, check integrality, and reduce mod p.

// Plain monomial q^m (q')^{m1} (q'')^{m2}; its weight is m + p m1 + p^2 m2.
using Mono2 = std::array<int64_t, 3>;

struct DeltaPoly2 {
    uint64_t p;
    std::map<Mono2, Padic> terms;

    void add(const Mono2& k, const Padic& v) {
        auto it = terms.find(k);
        if (it == terms.end()) {
            terms.emplace(k, v);
        } else {
            it->second = it->second + v;
        }
    }
};

inline int64_t mono2_weight(const Mono2& k, uint64_t p) {
    int64_t ip = static_cast<int64_t>(p);
    return k[0] + ip * k[1] + ip * ip * k[2];
}

// C(p, j) p^j as an exact Padic, built incrementally to dodge overflow.
inline Padic binom_p_times_pow(uint64_t p, int64_t j, int M) {
    Padic c(1, p, M);
    for (int64_t t = 1; t <= j; ++t)
        c = c * Padic(static_cast<int64_t>(p) - t + 1, p, M) / Padic(t, p, M);
    for (int64_t t = 0; t < j; ++t) c = c * Padic(static_cast<int64_t>(p), p, M);
    return c;
}

// phi(q) = q^p + p q' and phi^2(q) = (q^p + p q')^p + p (q')^p + p^2 q''.
inline std::pair<DeltaPoly2, DeltaPoly2> phi_powers(uint64_t p, int M = kDefaultPadicDigits) {
    check_prime_field(p);
    int64_t ip = static_cast<int64_t>(p);
    DeltaPoly2 phi{p, {}};
    phi.add({ip, 0, 0}, Padic(1, p, M));
    phi.add({0, 1, 0}, Padic(ip, p, M));

    DeltaPoly2 phi2{p, {}};
    for (int64_t j = 0; j <= ip; ++j)
        phi2.add({ip * (ip - j), j, 0}, binom_p_times_pow(p, j, M));
    phi2.add({0, ip, 0}, Padic(ip, p, M));
    phi2.add({0, 0, 1}, Padic(ip, p, M) * Padic(ip, p, M));
    return {std::move(phi), std::move(phi2)};
}

inline DeltaPoly2 poly2_mul(const DeltaPoly2& a, const DeltaPoly2& b, int64_t weight_cap) {
    DeltaPoly2 out{a.p, {}};
    for (const auto& [ka, va] : a.terms)
        for (const auto& [kb, vb] : b.terms) {
            Mono2 k{ka[0] + kb[0], ka[1] + kb[1], ka[2] + kb[2]};
            if (mono2_weight(k, a.p) >= weight_cap) continue;
            out.add(k, va * vb);
        }
    return out;
}

struct RecursionReport {
    int64_t i_max;
    int64_t n_max;
    CheckReport checks;

    bool pass() const { return checks.all_pass(); }
};

// The coefficient recursions behind integrality of the lift:
//   a_{p^i n} = a_{p^i} a_n                      for (n,p)=1, i >= 0,
//   a_{p^{i-1}} a_p = a_{p^i} + p^{kappa+1} a_{p^{i-2}}   for i >= 2.
// (The second line is the classical T(p) recursion in weight kappa+2; the
// divisor-sum example pins the a_{p^{i-2}} index.)
inline RecursionReport coeff_recursion_check(const CoeffProvider& a, uint64_t p, int64_t kappa,
                                   int64_t i_max, int64_t n_max) {
    int64_t ip = static_cast<int64_t>(p);
    int64_t need = n_max;
    int64_t pi = 1;
    for (int64_t i = 0; i < i_max; ++i) pi *= ip;
    need = pi * n_max;
    require(need <= a.n_max(), "range-exceeded",
            "provider covers a_1..a_" + std::to_string(a.n_max()) + ", need " +
                std::to_string(need));

    RecursionReport rep{i_max, n_max, {}};
    pi = 1;
    for (int64_t i = 0; i <= i_max; ++i) {
        bool ok = true;
        for (int64_t n = 1; n <= n_max; ++n) {
            if (n % ip == 0) continue;
            if (a.at(pi * n) != a.at(pi) * a.at(n)) ok = false;
        }
        rep.checks.add("a_{p^" + std::to_string(i) + " n} = a_{p^" + std::to_string(i) +
                           "} a_n",
                       ok, n_max);
        if (i < i_max) pi *= ip;
    }
    int64_t pk1 = 1;
    for (int64_t t = 0; t <= kappa; ++t) pk1 *= ip;
    int64_t pim2 = 1; // p^{i-2}
    for (int64_t i = 2; i <= i_max; ++i) {
        int64_t pim1 = pim2 * ip, piv = pim1 * ip;
        bool ok = a.at(pim1) * a.at(ip) == a.at(piv) + pk1 * a.at(pim2);
        rep.checks.add("a_{p^" + std::to_string(i - 1) + "} a_p = a_{p^" + std::to_string(i) +
                           "} + p^{k+1} a_{p^" + std::to_string(i - 2) + "}",
                       ok, i);
        pim2 *= ip;
    }
    return rep;
}

struct LiftAudit {
    int64_t digits_div_p = 0;   // p-adic digits consumed dividing by p
    int64_t digits_div_n = 0;   // max digits consumed dividing by n
    int64_t min_valuation = 0;  // most negative valuation reached by a term
};

struct PadicDeltaSeries2 {
    uint64_t p;
    int M;
    int64_t prec; // coefficients of weight < prec
    std::map<Mono2, Padic> terms;
    LiftAudit audit;
};

// The f^{#,2} series of the displayed sum, truncated at weight prec.
// Dropping n > prec is exact: every monomial of phi^i(q)^n has weight n p^i.
// Integrality of the result is asserted coefficient by coefficient; the
// coefficient recursions force the cancellations, so a violation points
// at bad input data.
inline PadicDeltaSeries2 sharp2_lift_fixed_digits(const CoeffProvider& a, uint64_t p,
                                                  int64_t kappa, int64_t prec, int M) {
    check_prime_field(p);
    require(kappa >= 0, "invalid-input", "kappa must be >= 0");
    require(prec - 1 <= a.n_max(), "range-exceeded", "provider too short for the lift");
    int64_t ip = static_cast<int64_t>(p);

    PadicDeltaSeries2 out{p, M, prec, {}, {}};
    auto [phi, phi2] = phi_powers(p, M);
    Padic ap(a.at(ip), p, M);
    Padic pkappa(1, p, M);
    for (int64_t t = 0; t < kappa; ++t) pkappa = pkappa * Padic(ip, p, M);

    DeltaPoly2 phi_n{p, {}};   // phi(q)^n, alive while n p < prec
    DeltaPoly2 phi2_n{p, {}};  // phi^2(q)^n, alive while n p^2 < prec
    Mono2 unit{0, 0, 0};
    phi_n.add(unit, Padic(1, p, M));
    phi2_n.add(unit, Padic(1, p, M));

    for (int64_t n = 1; n < prec; ++n) {
        if (n * ip < prec) phi_n = poly2_mul(phi_n, phi, prec);
        if (n * ip * ip < prec) phi2_n = poly2_mul(phi2_n, phi2, prec);
        out.audit.digits_div_n = std::max(out.audit.digits_div_n, vp_of(n, ip));
        out.audit.digits_div_p = std::max<int64_t>(out.audit.digits_div_p, 1);

        // a_n / (p n)
        Padic coef = Padic(a.at(n), p, M) / (Padic(ip, p, M) * Padic(n, p, M));

        DeltaPoly2 bracket{p, {}};
        if (n * ip * ip < prec)
            for (const auto& [k, v] : phi2_n.terms) bracket.add(k, pkappa * v);
        if (n * ip < prec)
            for (const auto& [k, v] : phi_n.terms) bracket.add(k, -(ap * v));
        bracket.add({n, 0, 0}, Padic(ip, p, M));

        for (const auto& [k, v] : bracket.terms) {
            Padic term = coef * v;
            out.audit.min_valuation = std::min(out.audit.min_valuation, term.valuation_at_least());
            auto it = out.terms.find(k);
            if (it == out.terms.end()) {
                out.terms.emplace(k, term);
            } else {
                it->second = it->second + term;
            }
        }
    }

    for (const auto& [k, v] : out.terms) {
        require(v.valuation_at_least() >= 0, "integrality-violation",
                "coefficient of q^" + std::to_string(k[0]) + " (q')^" + std::to_string(k[1]) +
                    " (q'')^" + std::to_string(k[2]) + " has negative valuation");
    }
    return out;
}

// Doubles the digit budget on cancellation until the word-size cap.
inline PadicDeltaSeries2 sharp2_lift(const CoeffProvider& a, uint64_t p, int64_t kappa,
                                     int64_t prec, int M = kDefaultPadicDigits) {
    int max_digits = 0;
    for (uint64_t pm = 1; pm <= (uint64_t(1) << 62) / p; pm *= p) ++max_digits;
    int digits = std::min(M, max_digits);
    for (;;) {
        try {
            return sharp2_lift_fixed_digits(a, p, kappa, prec, digits);
        } catch (const math_error& e) {
            if (e.kind() != "precision-exhausted" || digits >= max_digits) throw;
            digits = std::min(2 * digits, max_digits);
        }
    }
}

// Reduce mod p: q''-monomials must vanish and q'-exponents must land in
// {0, 1, p}, per the mod-p formula for the lift.
inline DeltaSeries1 reduce_mod_p(const PadicDeltaSeries2& F) {
    uint64_t p = F.p;
    int64_t ip = static_cast<int64_t>(p);
    DeltaSeries1 out(p);
    // The stored exponent in the (q'/q^p) basis equals the monomial weight,
    // so the weight cap is the precision of every component.
    out.set_component(0, LaurentSeries::zero(p, F.prec));
    out.set_component(1, LaurentSeries::zero(p, F.prec));
    out.set_component(ip, LaurentSeries::zero(p, F.prec));
    for (const auto& [k, v] : F.terms) {
        Fp r = v.residue_mod_p();
        if (r.is_zero()) continue;
        require(k[2] == 0, "nonvanishing-qdoubleprime",
                "q'' monomial survives reduction mod p");
        require(k[1] == 0 || k[1] == 1 || k[1] == ip, "shape-violation",
                "q' exponent " + std::to_string(k[1]) + " survives reduction mod p");
        int64_t psi_exp = k[0] + ip * k[1];
        out.add_to_component(k[1], LaurentSeries::monomial(p, psi_exp, r, F.prec));
    }
    return out;
}

} // namespace deltap
