#pragma once

#include <string>
#include <vector>

#include "deltap/symmetry.hpp"

namespace deltap {

// phi^{#,2} = phi^{(-1)} - lambda_p V(phi) (q'/q^p)
//                        + pbar^kappa V^2(phi) (q'/q^p)^p.
inline DeltaSeries1 sharp2(const EigenSystem& sys, const LaurentSeries& phi,
                           bool verify = false,
                           const std::vector<int64_t>& verify_n = {2, 3}) {
    if (verify) {
        auto rep = eigen_check_classical(phi, sys, verify_n);
        require(rep.all_pass(), "eigencheck-failed",
                "phi is not an eigenvector for the given system");
    }
    DeltaSeries1 f(sys.p);
    f.set_component(0, theta_inv_part(phi));
    f.add_to_component(1, v_classical(phi).scaled(-sys.lambda_p));
    if (sys.kappa == 0)
        f.add_to_component(static_cast<int64_t>(sys.p), v_classical(v_classical(phi)));
    return f;
}

inline std::vector<int64_t> default_n_list(const EigenSystem& sys, int64_t prec) {
    std::vector<int64_t> out;
    for (int64_t n = 2; n <= std::min<int64_t>(20, prec / 2); ++n)
        if (n % static_cast<int64_t>(sys.p) != 0) out.push_back(n);
    return out;
}

// Checks n T_kappa(n) f = lambda_n f for each listed n, and
// "pT_kappa(p)" f = lambda_p f.  f must be Taylor delta-p-symmetric.
inline CheckReport eigen_check_delta(const DeltaSeries1& f, const EigenSystem& sys,
                                     const std::vector<int64_t>& n_list) {
    auto prof = structure_decompose(f);
    require(prof.has_value() && prof->taylor, "not-symmetric",
            "eigen check needs a Taylor delta-p-symmetric series");
    CheckReport rep;
    for (int64_t n : n_list) {
        int64_t prec_n = floor_div(f.min_prec(), n);
        require(prec_n >= 2, "precision-too-low",
                "T(" + std::to_string(n) + ") check left precision " + std::to_string(prec_n));
        auto lhs = hecke_delta(f, n, sys.kappa, sys.N).scaled(Fp(n, sys.p));
        rep.add("n T_k(" + std::to_string(n) + ")", lhs.agrees_with(f.scaled(sys.lambda_at(n))),
                prec_n);
    }
    auto tp = ptp(f, sys.kappa);
    rep.add("pT_k(p)", tp.agrees_with(f.scaled(sys.lambda_p)),
            floor_div(f.min_prec(), static_cast<int64_t>(sys.p)));
    return rep;
}

// c + sum_i c_i F_rel^i (phi^{#,2}), with every term capped at the working
// precision so that invisible high-Frobenius tails are dropped.
inline DeltaSeries1 reconstruct_eigenform(const EigenSystem& sys, const LaurentSeries& phi,
                                          Fp c, const std::vector<Fp>& c_list) {
    int64_t cap = phi.prec();
    int64_t bound = std::max<int64_t>(2 * static_cast<int64_t>(sys.p), cap);
    DeltaSeries1 acc(sys.p, bound);
    if (!c.is_zero()) acc.set_component(0, LaurentSeries::monomial(sys.p, 0, c, cap));
    DeltaSeries1 term(sys.p, bound);
    term = term + sharp2(sys, phi).truncated(cap);
    for (size_t i = 0; i < c_list.size(); ++i) {
        if (term.is_zero()) break;
        acc = acc + term.scaled(c_list[i]);
        term = frobenii(term, Frobenius::F_rel).truncated(cap);
    }
    return acc;
}

struct SharpDecomposition {
    Fp c;
    std::vector<Fp> c_list;
    LaurentSeries phi;
    bool tail_relation_verified;
    CheckReport eigen_report;
};

// Multiplicity-one decomposition: extract c = a_0(phi_0), c_i = a_{p^i}(phi_0),
// rebuild phi from the eigenvalues with gamma = 1, and verify the
// reconstruction matches f.  A mismatch would falsify the multiplicity-one
// description at this precision and is always treated as fatal.
inline SharpDecomposition decompose_eigenform(const DeltaSeries1& f, const EigenSystem& sys,
                                              std::vector<int64_t> n_list = {}) {
    uint64_t p = sys.p;
    int64_t ip = static_cast<int64_t>(p);
    const LaurentSeries* phi0p = f.component(0);
    require(phi0p != nullptr, "not-eigen", "order-0 part is zero");
    LaurentSeries phi0 = *phi0p;
    bool nonconstant = f.mprime_top() > 0;
    for (int64_t e = phi0.low(); e < phi0.prec(); ++e)
        if (e != 0 && !phi0.coeff(e).is_zero()) nonconstant = true;
    require(nonconstant, "not-eigen", "decomposition needs f outside k");

    if (n_list.empty()) n_list = default_n_list(sys, f.min_prec());
    auto rep = eigen_check_delta(f, sys, n_list);
    require(rep.all_pass(), "not-eigen", "f fails the delta eigenvector equations");

    SharpDecomposition dec{phi0.known(0) ? phi0.coeff(0) : Fp(0, p),
                           {},
                           eigen_series(sys, Fp(1, p), phi0.prec()),
                           false,
                           rep};
    for (int64_t pi = 1; pi < phi0.prec(); pi *= ip) dec.c_list.push_back(phi0.coeff(pi));

    DeltaSeries1 rebuilt = reconstruct_eigenform(sys, dec.phi, dec.c, dec.c_list);
    require(rebuilt.agrees_with(f), "reconstruction-mismatch",
            "multiplicity-one reconstruction differs from f");

    // Tail relation pbar^kappa c_{i-1} = lambda_p c_i for i beyond the stored
    // range: one symbolic step past c_T is checkable; solvable whenever
    // lambda_p != 0, and otherwise forces pbar^kappa c_T = 0.  The behavior
    // beyond that is an assumption, not an assertion.
    Fp pbar = Fp(sys.kappa == 0 ? 1 : 0, p);
    dec.tail_relation_verified =
        !sys.lambda_p.is_zero() || dec.c_list.empty() || (pbar * dec.c_list.back()).is_zero();
    return dec;
}

enum class EigenCase { phi_inv_basis = 1, sharp2_basis = 2, sharp1_basis = 3 };

struct CaseLabel {
    EigenCase which;
    std::string basis;
    std::string module_structure;
};

// Trichotomy for the space of delta-eigenvectors with fixed eigenvalues.
inline CaseLabel classify_case(const EigenSystem& sys) {
    bool kpos = sys.kappa > 0, lp0 = sys.lambda_p.is_zero();
    if (kpos && lp0)
        return {EigenCase::phi_inv_basis, "phi^(-1)",
                "free k[[F_rel]]-module of rank 1 inside k[[q]]"};
    if (!kpos && !lp0)
        return {EigenCase::sharp1_basis, "phi^sharp1",
                "free k[F_rel]-module of rank 1 inside k[[q]][q']"};
    return {EigenCase::sharp2_basis, "phi^sharp2",
            "free k[F_rel]-module of rank 1 inside k[[q]][q']"};
}

// phi^{#,1} = sum_i lambda_p^{-i} F_rel^i (phi^{#,2}); defined only in the
// case kappa = 0, lambda_p != 0.
inline DeltaSeries1 sharp1(const EigenSystem& sys, const LaurentSeries& phi) {
    require(sys.kappa == 0 && !sys.lambda_p.is_zero(), "invalid-case",
            "phi^sharp1 exists only for kappa = 0, lambda_p != 0");
    int64_t cap = phi.prec();
    int64_t bound = std::max<int64_t>(2 * static_cast<int64_t>(sys.p), cap);
    DeltaSeries1 acc(sys.p, bound);
    DeltaSeries1 term(sys.p, bound);
    term = term + sharp2(sys, phi).truncated(cap);
    Fp scale = Fp(1, sys.p);
    Fp linv = sys.lambda_p.inv();
    while (!term.is_zero()) {
        acc = acc + term.scaled(scale);
        term = frobenii(term, Frobenius::F_rel).truncated(cap);
        scale = scale * linv;
    }
    return acc;
}

} // namespace deltap
