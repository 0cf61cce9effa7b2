#pragma once

#include <optional>
#include <vector>

#include "deltap/deltaseries.hpp"

namespace deltap {

// Recognized form of a Laurent delta-p-symmetric series:
//   f = phi_0(q) + sum_{s>=0} V^{s+1}(phi_{p^s}(q)) (q'/q^p)^{p^s}.
// taylor is set when f is holomorphic with phi_{p^s} in q k[[q]].
struct SymmetricProfile {
    LaurentSeries phi0;
    std::vector<LaurentSeries> phis; // index s -> phi_{p^s}
    bool taylor;
};

inline std::optional<int64_t> log_p_exact(int64_t m, int64_t p) {
    int64_t s = 0;
    while (m % p == 0) { m /= p; ++s; }
    return m == 1 ? std::optional<int64_t>(s) : std::nullopt;
}

inline bool exponents_divisible_by(const LaurentSeries& f, int64_t d) {
    for (int64_t e = f.low(); e < f.prec(); ++e)
        if (e % d != 0 && !f.coeff(e).is_zero()) return false;
    return true;
}

// Detects the structure above: components allowed only at m' in {0} union
// {p^s}, with the p^s component in the image of V^{s+1}.  Rejection is the
// nullopt return; it means "unrecognized", not "proven non-symmetric" in
// the Laurent case.
inline std::optional<SymmetricProfile> structure_decompose(const DeltaSeries1& f) {
    uint64_t p = f.prime();
    int64_t ip = static_cast<int64_t>(p);
    int64_t smax = -1;
    for (const auto& [m, s] : f.components()) {
        if (m == 0) continue;
        auto lg = log_p_exact(m, ip);
        if (!lg) {
            // A non-p-power component rejects only if it is actually nonzero;
            // a zero-within-precision one carries no visible monomials.
            if (s.is_zero()) continue;
            return std::nullopt;
        }
        // Zero-within-precision p-power components still open a channel:
        // their unknown tails bound the precision of everything derived.
        smax = std::max(smax, *lg);
    }
    int64_t phi0_prec = 1;
    if (f.component(0)) {
        phi0_prec = f.component(0)->prec();
    } else if (!f.components().empty()) {
        phi0_prec = f.min_prec();
    }
    SymmetricProfile prof{f.component_or_zero(0, phi0_prec), {}, true};
    int64_t ps = 1;
    for (int64_t s = 0; s <= smax; ++s) {
        int64_t prec = f.component(ps) ? f.component(ps)->prec() : phi0_prec;
        LaurentSeries comp = f.component_or_zero(ps, prec);
        // V^{s+1}-image test: every exponent divisible by p^{s+1}.
        int64_t pw = ip;
        LaurentSeries phi = comp;
        for (int64_t i = 0; i <= s; ++i) {
            if (!exponents_divisible_by(phi, ip)) return std::nullopt;
            phi = u_classical(phi);
            pw *= ip;
        }
        prof.phis.push_back(phi);
        ps *= ip;
    }
    // Taylor flag: holomorphic with phi_{p^s} in q k[[q]] and phi_0 in k[[q]].
    prof.taylor = f.holomorphic_at_infinity() && prof.phi0.low() >= 0;
    for (const auto& phi : prof.phis)
        if (!phi.is_zero() && phi.low() < 1) prof.taylor = false;
    return prof;
}

// Reconstruction of the series from its profile.
inline DeltaSeries1 profile_to_series(const SymmetricProfile& prof, uint64_t p) {
    DeltaSeries1 f(p);
    f.set_component(0, prof.phi0);
    int64_t ps = 1;
    for (size_t s = 0; s < prof.phis.size(); ++s) {
        LaurentSeries comp = prof.phis[s];
        for (size_t i = 0; i <= s; ++i) comp = v_classical(comp);
        f.set_component(ps, comp);
        ps *= static_cast<int64_t>(p);
    }
    return f;
}

// "pU" on a series in the recognized symmetric form:
//   -sum_s V^s(phi_{p^s}^{(-1)}) + sum_s V^{s+1}(U(phi_{p^s})) (q'/q^p)^{p^s}.
inline DeltaSeries1 pu(const DeltaSeries1& f) {
    auto prof = structure_decompose(f);
    require(prof.has_value(), "not-symmetric",
            "pU is only defined on delta-p-symmetric series");
    uint64_t p = f.prime();
    DeltaSeries1 out(p, f.mprime_max());
    int64_t ps = 1;
    for (size_t s = 0; s < prof->phis.size(); ++s) {
        LaurentSeries inv_part = theta_inv_part(prof->phis[s]);
        for (size_t i = 0; i < s; ++i) inv_part = v_classical(inv_part);
        out.add_to_component(0, -inv_part);

        LaurentSeries up = u_classical(prof->phis[s]);
        for (size_t i = 0; i <= s; ++i) up = v_classical(up);
        out.add_to_component(ps, up);
        ps *= static_cast<int64_t>(p);
    }
    return out;
}

// Closed form for pU on the monomial q^{n p^{s+1}} (q')^{p^s}.
inline DeltaSeries1 pu_monomial(int64_t n, int64_t s, uint64_t p, int64_t prec = 64) {
    check_prime_field(p);
    int64_t ip = static_cast<int64_t>(p);
    int64_t ps = 1;
    for (int64_t i = 0; i < s; ++i) ps *= ip;
    DeltaSeries1 out(p, std::max<int64_t>(2 * ip, ps));
    if ((n + 1) % ip == 0) {
        out.set_component(ps, LaurentSeries::monomial(p, (n + 1) * ps, Fp(1, p),
                                                      std::max((n + 1) * ps + 1, prec)));
    } else {
        Fp c = -Fp(1, p) / Fp(n + 1, p);
        out.set_component(0, LaurentSeries::monomial(p, (n + 1) * ps, c,
                                                     std::max((n + 1) * ps + 1, prec)));
    }
    return out;
}

// "pT_kappa(p)" = "pU" + p^kappa-bar * V, the indicator being 1 iff kappa = 0.
inline DeltaSeries1 ptp(const DeltaSeries1& f, int64_t kappa) {
    require(kappa >= 0, "invalid-input", "kappa must be >= 0");
    DeltaSeries1 out = pu(f);
    if (kappa == 0) out = out + v_delta(f);
    return out;
}

// Componentwise eigenvalue conditions for "pT_kappa(p)" f = lambda_p f:
//  1) U(phi_{p^s}) = lambda_p phi_{p^s} for all s,
//  2) pbar^kappa V(phi_0) - sum_s V^s(phi_{p^s}^{(-1)}) = lambda_p phi_0.
inline CheckReport ptp_eigen_conditions(const DeltaSeries1& f, int64_t kappa, Fp lambda_p) {
    auto prof = structure_decompose(f);
    require(prof.has_value(), "not-symmetric", "series is not in the recognized form");
    CheckReport rep;
    for (size_t s = 0; s < prof->phis.size(); ++s) {
        const auto& phi = prof->phis[s];
        rep.add("U(phi_{p^" + std::to_string(s) + "})",
                u_classical(phi).agrees_with(phi.scaled(lambda_p)),
                floor_div(phi.prec(), static_cast<int64_t>(f.prime())));
    }
    LaurentSeries lhs = kappa == 0 ? v_classical(prof->phi0)
                                   : LaurentSeries::zero(f.prime(), prof->phi0.prec() *
                                                                        static_cast<int64_t>(f.prime()));
    for (size_t s = 0; s < prof->phis.size(); ++s) {
        LaurentSeries t = theta_inv_part(prof->phis[s]);
        for (size_t i = 0; i < s; ++i) t = v_classical(t);
        lhs = lhs - t;
    }
    rep.add("pbar^k V(phi_0) - sum V^s(phi_{p^s}^{(-1)}) = lambda_p phi_0",
            lhs.agrees_with(prof->phi0.scaled(lambda_p)),
            std::min(lhs.prec(), prof->phi0.prec()));
    return rep;
}

} // namespace deltap
