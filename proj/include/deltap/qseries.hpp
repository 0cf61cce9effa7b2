#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "deltap/errors.hpp"
#include "deltap/fp.hpp"

namespace deltap {

inline int64_t floor_div(int64_t a, int64_t b) {
    int64_t q = a / b, r = a % b;
    return (r != 0 && (r < 0) != (b < 0)) ? q - 1 : q;
}

inline int64_t ceil_div(int64_t a, int64_t b) { return -floor_div(-a, b); }

// Truncated Laurent series over F_p.  Exponents below `low` are exactly
// zero, coefficients are stored for low..prec-1, and nothing is known from
// q^prec on.  Series are kept canonical: no leading zero coefficients.
class LaurentSeries {
public:
    LaurentSeries(uint64_t p, int64_t low, int64_t prec, std::vector<uint32_t> coeffs)
        : p_(p), low_(low), prec_(prec), c_(std::move(coeffs)) {
        require(low_ <= prec_, "invalid-input", "series with low > prec");
        require(static_cast<int64_t>(c_.size()) == prec_ - low_, "invalid-input",
                "coefficient count must equal prec - low");
        for (auto& v : c_) v %= p_;
        canonicalize();
    }

    static LaurentSeries zero(uint64_t p, int64_t prec) { return {p, prec, prec, {}}; }

    static LaurentSeries monomial(uint64_t p, int64_t exp, Fp coeff, int64_t prec) {
        require(exp < prec, "invalid-input", "monomial exponent beyond precision");
        std::vector<uint32_t> c(static_cast<size_t>(prec - exp), 0);
        c[0] = static_cast<uint32_t>(coeff.value());
        return {p, exp, prec, std::move(c)};
    }

    uint64_t prime() const { return p_; }
    int64_t low() const { return low_; }
    int64_t prec() const { return prec_; }
    bool is_zero() const { return low_ == prec_; }

    // Coefficient at exponent e; reading at or beyond prec is an error.
    Fp coeff(int64_t e) const {
        require(e < prec_, "precision-too-low",
                "coefficient at q^" + std::to_string(e) + " beyond precision " +
                    std::to_string(prec_));
        if (e < low_) return Fp::raw(0, p_);
        return Fp::raw(c_[static_cast<size_t>(e - low_)], p_);
    }

    bool known(int64_t e) const { return e < prec_; }

    // Equality on the overlap of known exponents.
    bool agrees_with(const LaurentSeries& o) const {
        require(p_ == o.p_, "invalid-input", "mixed primes");
        int64_t hi = std::min(prec_, o.prec_);
        for (int64_t e = std::min(low_, o.low_); e < hi; ++e)
            if (coeff(e) != o.coeff(e)) return false;
        return true;
    }

    LaurentSeries truncated(int64_t new_prec) const {
        int64_t np = std::min(new_prec, prec_);
        if (np <= low_) return zero(p_, np);
        return {p_, low_, np, std::vector<uint32_t>(c_.begin(), c_.begin() + (np - low_))};
    }

    LaurentSeries operator+(const LaurentSeries& o) const {
        require(p_ == o.p_, "invalid-input", "mixed primes");
        int64_t lo = std::min(low_, o.low_), hi = std::min(prec_, o.prec_);
        if (hi <= lo) return zero(p_, hi);
        std::vector<uint32_t> c(static_cast<size_t>(hi - lo), 0);
        for (int64_t e = lo; e < hi; ++e) {
            uint64_t a = (e >= low_ && e < prec_) ? c_[size_t(e - low_)] : 0;
            uint64_t b = (e >= o.low_ && e < o.prec_) ? o.c_[size_t(e - o.low_)] : 0;
            c[size_t(e - lo)] = static_cast<uint32_t>(fpmod::add(a, b, p_));
        }
        return {p_, lo, hi, std::move(c)};
    }

    LaurentSeries operator-() const {
        std::vector<uint32_t> c(c_);
        for (auto& v : c) v = static_cast<uint32_t>(fpmod::neg(v, p_));
        return {p_, low_, prec_, std::move(c)};
    }

    LaurentSeries operator-(const LaurentSeries& o) const { return *this + (-o); }

    LaurentSeries operator*(const LaurentSeries& o) const {
        require(p_ == o.p_, "invalid-input", "mixed primes");
        int64_t lo = low_ + o.low_;
        int64_t hi = std::min(prec_ + o.low_, o.prec_ + low_);
        if (hi <= lo) return zero(p_, hi);
        std::vector<uint32_t> c(static_cast<size_t>(hi - lo), 0);
        for (int64_t e1 = low_; e1 < prec_; ++e1) {
            uint64_t a = c_[size_t(e1 - low_)];
            if (a == 0) continue;
            for (int64_t e2 = o.low_; e2 < o.prec_ && e1 + e2 < hi; ++e2) {
                uint64_t b = o.c_[size_t(e2 - o.low_)];
                if (b == 0) continue;
                auto& slot = c[size_t(e1 + e2 - lo)];
                slot = static_cast<uint32_t>(fpmod::add(slot, fpmod::mul(a, b, p_), p_));
            }
        }
        return {p_, lo, hi, std::move(c)};
    }

    LaurentSeries scaled(Fp k) const {
        std::vector<uint32_t> c(c_);
        for (auto& v : c) v = static_cast<uint32_t>(fpmod::mul(v, k.value(), p_));
        return {p_, low_, prec_, std::move(c)};
    }

    // Map over stored coefficients: e -> new coefficient.
    LaurentSeries map_coeffs(const std::function<uint64_t(int64_t, uint64_t)>& fn) const {
        std::vector<uint32_t> c(c_.size());
        for (int64_t e = low_; e < prec_; ++e)
            c[size_t(e - low_)] = static_cast<uint32_t>(fn(e, c_[size_t(e - low_)]) % p_);
        return {p_, low_, prec_, std::move(c)};
    }

private:
    void canonicalize() {
        size_t skip = 0;
        while (skip < c_.size() && c_[skip] == 0) ++skip;
        if (skip > 0) {
            c_.erase(c_.begin(), c_.begin() + skip);
            low_ += static_cast<int64_t>(skip);
        }
    }

    uint64_t p_;
    int64_t low_;
    int64_t prec_;
    std::vector<uint32_t> c_;
};

// theta = q d/dq.
inline LaurentSeries theta(const LaurentSeries& f) {
    return f.map_coeffs([&](int64_t e, uint64_t a) {
        return fpmod::mul(fpmod::from_int(e, f.prime()), a, f.prime());
    });
}

// a_n -> a_n / n on exponents coprime to p, 0 elsewhere; equals theta^{p-2}.
inline LaurentSeries theta_inv_part(const LaurentSeries& f) {
    uint64_t p = f.prime();
    return f.map_coeffs([&](int64_t e, uint64_t a) -> uint64_t {
        uint64_t em = fpmod::from_int(e, p);
        if (em == 0) return 0;
        return fpmod::mul(a, fpmod::inv(em, p), p);
    });
}

// Atkin U: sum a_n q^n -> sum a_{np} q^n.  prec drops to floor(prec/p).
inline LaurentSeries u_classical(const LaurentSeries& f) {
    int64_t p = static_cast<int64_t>(f.prime());
    int64_t lo = ceil_div(f.low(), p), hi = floor_div(f.prec(), p);
    if (hi <= lo) return LaurentSeries::zero(f.prime(), hi);
    std::vector<uint32_t> c(static_cast<size_t>(hi - lo));
    for (int64_t m = lo; m < hi; ++m)
        c[size_t(m - lo)] = static_cast<uint32_t>(f.coeff(m * p).value());
    return {f.prime(), lo, hi, std::move(c)};
}

// V: sum a_n q^n -> sum a_n q^{pn}.  prec grows to p*prec.
inline LaurentSeries v_classical(const LaurentSeries& f) {
    int64_t p = static_cast<int64_t>(f.prime());
    if (f.is_zero()) return LaurentSeries::zero(f.prime(), p * f.prec());
    int64_t lo = p * f.low(), hi = p * f.prec();
    std::vector<uint32_t> c(static_cast<size_t>(hi - lo), 0);
    for (int64_t e = f.low(); e < f.prec(); ++e)
        c[size_t(p * e - lo)] = static_cast<uint32_t>(f.coeff(e).value());
    return {f.prime(), lo, hi, std::move(c)};
}

inline std::vector<int64_t> divisors_of(int64_t n) {
    std::vector<int64_t> out;
    for (int64_t d = 1; d * d <= n; ++d) {
        if (n % d == 0) {
            out.push_back(d);
            if (d != n / d) out.push_back(n / d);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

// Classical weight-kappa Hecke operator T_kappa(n) away from p, with the
// trivial character mod N.  Uses the convention (0, n) = n.
inline LaurentSeries hecke_classical(const LaurentSeries& f, int64_t n, int64_t kappa,
                                     int64_t N) {
    uint64_t p = f.prime();
    require(n >= 1, "invalid-input", "Hecke index must be >= 1");
    require(n % static_cast<int64_t>(p) != 0, "invalid-input",
            "T(n) away from p requires gcd(n, p) = 1");
    int64_t prec_out = floor_div(f.prec(), n);
    int64_t m_lo = f.low() < 0 ? f.low() * n : ceil_div(f.low(), n);
    if (prec_out <= m_lo) return LaurentSeries::zero(p, prec_out);
    std::vector<uint32_t> c(static_cast<size_t>(prec_out - m_lo), 0);
    auto divs = divisors_of(n);
    for (int64_t m = m_lo; m < prec_out; ++m) {
        uint64_t acc = 0;
        for (int64_t A : divs) {
            if (m != 0 && m % A != 0) continue; // A | (n, m), with (0, n) = n
            if (std::gcd(A, N) != 1) continue;  // trivial character mod N
            int64_t src = m * n / (A * A);
            if (src < f.low()) continue;
            uint64_t term = fpmod::mul(fpmod::pow_signed(fpmod::from_int(A, p), kappa - 1, p),
                                       f.coeff(src).value(), p);
            acc = fpmod::add(acc, term, p);
        }
        c[size_t(m - m_lo)] = static_cast<uint32_t>(acc);
    }
    return {p, m_lo, prec_out, std::move(c)};
}

// Integer coefficient source a_1..a_{n_max}.
class CoeffProvider {
public:
    CoeffProvider(std::vector<int64_t> values) : a_(std::move(values)) {}

    int64_t n_max() const { return static_cast<int64_t>(a_.size()); }

    int64_t at(int64_t n) const {
        require(n >= 1 && n <= n_max(), "range-exceeded",
                "coefficient index " + std::to_string(n) + " outside [1, " +
                    std::to_string(n_max()) + "]");
        return a_[static_cast<size_t>(n - 1)];
    }

    Fp at_mod(int64_t n, uint64_t p) const { return Fp(at(n), p); }

    LaurentSeries series_mod(uint64_t p, int64_t prec) const {
        require(prec - 1 <= n_max(), "range-exceeded", "provider too short for precision");
        std::vector<uint32_t> c(static_cast<size_t>(std::max<int64_t>(prec - 1, 0)), 0);
        for (int64_t n = 1; n < prec; ++n)
            c[size_t(n - 1)] = static_cast<uint32_t>(fpmod::from_int(at(n), p));
        return {p, 1, prec, std::move(c)};
    }

private:
    std::vector<int64_t> a_;
};

// a_n = sum of divisors of n coprime to the (prime) level N.
inline CoeffProvider divisor_sum_coeffs(int64_t N, int64_t n_max) {
    require(N >= 5 && is_prime_u64(static_cast<uint64_t>(N)), "invalid-input",
            "divisor-sum level must be a prime >= 5");
    std::vector<int64_t> a(static_cast<size_t>(n_max), 0);
    for (int64_t d = 1; d <= n_max; ++d) {
        if (d % N == 0) continue;
        for (int64_t m = d; m <= n_max; m += d) a[size_t(m - 1)] += d;
    }
    return CoeffProvider(std::move(a));
}

// Eigenvalue data: lambda_n for n coprime to p (n <= n_max) plus lambda_p.
struct EigenSystem {
    uint64_t p;
    int64_t N;
    int64_t kappa;
    std::map<int64_t, Fp> lambda;
    Fp lambda_p;
    int64_t n_max;

    static EigenSystem from_provider(const CoeffProvider& a, uint64_t p, int64_t N,
                                     int64_t kappa) {
        check_prime_field(p);
        require(kappa >= 0, "invalid-input", "kappa must be >= 0");
        EigenSystem sys;
        sys.p = p;
        sys.N = N;
        sys.kappa = kappa;
        sys.n_max = a.n_max();
        for (int64_t n = 1; n <= a.n_max(); ++n)
            if (n % static_cast<int64_t>(p) != 0) sys.lambda[n] = a.at_mod(n, p);
        sys.lambda_p = a.at_mod(static_cast<int64_t>(p), p);
        return sys;
    }

    Fp lambda_at(int64_t n) const {
        auto it = lambda.find(n);
        require(it != lambda.end(), "missing-eigenvalue",
                "no eigenvalue for n = " + std::to_string(n));
        return it->second;
    }
};

// gamma * sum_{(n,p)=1} sum_{i>=0} lambda_n lambda_p^i q^{n p^i}, truncated.
// Uses the 0^0 = 1 convention for lambda_p.
inline LaurentSeries eigen_series(const EigenSystem& sys, Fp gamma, int64_t prec) {
    require(!gamma.is_zero(), "invalid-input", "gamma must be nonzero");
    uint64_t p = sys.p;
    std::vector<uint32_t> c(static_cast<size_t>(std::max<int64_t>(prec - 1, 0)), 0);
    for (int64_t n = 1; n < prec; ++n) {
        if (n % static_cast<int64_t>(p) == 0) continue;
        Fp ln = sys.lambda_at(n);
        Fp lpi = Fp::raw(1, p);
        for (int64_t e = n; e < prec; e *= static_cast<int64_t>(p)) {
            Fp v = gamma * ln * lpi;
            auto& slot = c[size_t(e - 1)];
            slot = static_cast<uint32_t>(fpmod::add(slot, v.value(), p));
            lpi = lpi * sys.lambda_p;
        }
    }
    return {p, 1, std::max<int64_t>(prec, 1), std::move(c)};
}

struct CheckItem {
    std::string name;
    bool pass;
    int64_t precision;
};

struct CheckReport {
    std::vector<CheckItem> items;

    bool all_pass() const {
        return std::all_of(items.begin(), items.end(), [](const CheckItem& i) { return i.pass; });
    }

    void add(std::string name, bool pass, int64_t precision) {
        items.push_back({std::move(name), pass, precision});
    }
};

// Verifies T_{kappa+2}(n) phi = lambda_n phi for the listed n and
// U phi = lambda_p phi, each on the propagated precision.
inline CheckReport eigen_check_classical(const LaurentSeries& phi, const EigenSystem& sys,
                                         const std::vector<int64_t>& n_list) {
    require(!phi.is_zero(), "invalid-input", "eigen check on the zero series");
    CheckReport rep;
    for (int64_t n : n_list) {
        int64_t prec_n = floor_div(phi.prec(), n);
        require(prec_n >= 2, "precision-too-low",
                "T(" + std::to_string(n) + ") check left precision " + std::to_string(prec_n));
        LaurentSeries lhs = hecke_classical(phi, n, sys.kappa + 2, sys.N);
        LaurentSeries rhs = phi.scaled(sys.lambda_at(n));
        rep.add("T_{k+2}(" + std::to_string(n) + ")", lhs.agrees_with(rhs), prec_n);
    }
    int64_t prec_p = floor_div(phi.prec(), static_cast<int64_t>(sys.p));
    require(prec_p >= 2, "precision-too-low", "U check left precision " + std::to_string(prec_p));
    LaurentSeries u = u_classical(phi);
    rep.add("U", u.agrees_with(phi.scaled(sys.lambda_p)), prec_p);
    return rep;
}

} // namespace deltap
