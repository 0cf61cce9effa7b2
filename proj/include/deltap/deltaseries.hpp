#pragma once

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "deltap/qseries.hpp"

namespace deltap {

// Order-1 delta-series over F_p in the (q'/q^p)-power basis:
//   f = sum_{m'} f_{m'}(q) (q'/q^p)^{m'}.
// Absent keys are exact zeros.  A stored zero component is zero only as far
// as its precision reaches; normalized() trims those at serialization
// boundaries.  m' is bounded (default 2p); inserting a nonzero component
// beyond the bound fails loudly.
class DeltaSeries1 {
public:
    explicit DeltaSeries1(uint64_t p, int64_t mprime_max = 0)
        : p_(p), mmax_(mprime_max > 0 ? mprime_max : 2 * static_cast<int64_t>(p)) {}

    uint64_t prime() const { return p_; }
    int64_t mprime_max() const { return mmax_; }
    const std::map<int64_t, LaurentSeries>& components() const { return comp_; }

    // Zero as far as the stored precision reaches.
    bool is_zero() const {
        for (const auto& [m, s] : comp_)
            if (!s.is_zero()) return false;
        return true;
    }

    int64_t mprime_top() const {
        int64_t top = 0;
        for (const auto& [m, s] : comp_)
            if (!s.is_zero()) top = m;
        return top;
    }

    // Minimum component precision (series are compared per component).
    int64_t min_prec() const {
        int64_t m = std::numeric_limits<int64_t>::max();
        for (const auto& [k, s] : comp_) m = std::min(m, s.prec());
        return m;
    }

    const LaurentSeries* component(int64_t mprime) const {
        auto it = comp_.find(mprime);
        return it == comp_.end() ? nullptr : &it->second;
    }

    LaurentSeries component_or_zero(int64_t mprime, int64_t prec) const {
        auto it = comp_.find(mprime);
        return it == comp_.end() ? LaurentSeries::zero(p_, prec) : it->second;
    }

    void set_component(int64_t mprime, LaurentSeries s) {
        require(s.prime() == p_, "invalid-input", "mixed primes");
        require(mprime >= 0, "invalid-input", "negative q' exponent");
        require(s.is_zero() || mprime <= mmax_, "invalid-input",
                "component m' = " + std::to_string(mprime) + " exceeds mprime_max " +
                    std::to_string(mmax_));
        comp_.insert_or_assign(mprime, std::move(s));
    }

    DeltaSeries1 with_mprime_max(int64_t bound) const {
        DeltaSeries1 r(p_, bound);
        for (const auto& [m, s] : comp_) r.set_component(m, s);
        return r;
    }

    // Drop components that are zero within their precision; the result
    // claims exact zeros there, which is the canonical serialized form.
    DeltaSeries1 normalized() const {
        DeltaSeries1 r(p_, mmax_);
        for (const auto& [m, s] : comp_)
            if (!s.is_zero()) r.set_component(m, s);
        return r;
    }

    void add_to_component(int64_t mprime, const LaurentSeries& s) {
        auto it = comp_.find(mprime);
        if (it == comp_.end()) {
            set_component(mprime, s);
        } else {
            set_component(mprime, it->second + s);
        }
    }

    DeltaSeries1 operator+(const DeltaSeries1& o) const {
        DeltaSeries1 r(p_, std::max(mmax_, o.mmax_));
        r.comp_ = comp_;
        for (const auto& [k, s] : o.comp_) r.add_to_component(k, s);
        return r;
    }

    DeltaSeries1 operator-(const DeltaSeries1& o) const { return *this + o.scaled(Fp(-1, p_)); }

    DeltaSeries1 scaled(Fp k) const {
        DeltaSeries1 r(p_, mmax_);
        if (k.is_zero()) return r;
        for (const auto& [m, s] : comp_) r.set_component(m, s.scaled(k));
        return r;
    }

    DeltaSeries1 operator*(const DeltaSeries1& o) const {
        DeltaSeries1 r(p_, std::max(mmax_, o.mmax_));
        for (const auto& [m1, s1] : comp_)
            for (const auto& [m2, s2] : o.comp_) r.add_to_component(m1 + m2, s1 * s2);
        return r;
    }

    // Cap every component at q-precision `cap` (in the (q'/q^p) basis the
    // stored exponent is the monomial weight, so this is a weight cap).
    DeltaSeries1 truncated(int64_t cap) const {
        DeltaSeries1 r(p_, mmax_);
        for (const auto& [m, s] : comp_) r.set_component(m, s.truncated(cap));
        return r;
    }

    // Componentwise equality on the overlap; absent components are zero.
    bool agrees_with(const DeltaSeries1& o) const {
        require(p_ == o.p_, "invalid-input", "mixed primes");
        for (const auto& [m, s] : comp_) {
            const LaurentSeries* t = o.component(m);
            if (!(t ? s.agrees_with(*t) : s.is_zero())) return false;
        }
        for (const auto& [m, t] : o.comp_)
            if (!component(m) && !t.is_zero()) return false;
        return true;
    }

    // All plain q-exponents >= 0, i.e. each f_{m'} has low >= p m'.
    bool holomorphic_at_infinity() const {
        for (const auto& [m, s] : comp_)
            if (!s.is_zero() && s.low() < static_cast<int64_t>(p_) * m) return false;
        return true;
    }

    static DeltaSeries1 from_order0(LaurentSeries s) {
        DeltaSeries1 r(s.prime());
        r.set_component(0, std::move(s));
        return r;
    }

private:
    uint64_t p_;
    int64_t mmax_;
    std::map<int64_t, LaurentSeries> comp_;
};

// Plain monomial basis q^m (q')^{m'}; only used at the serialization
// boundary and as the independent route for the Hecke action.
struct MonomialSeries1 {
    uint64_t p;
    std::map<int64_t, LaurentSeries> comp; // m' -> coefficient series in q
};

inline MonomialSeries1 to_monomial_basis(const DeltaSeries1& f) {
    MonomialSeries1 r{f.prime(), {}};
    int64_t p = static_cast<int64_t>(f.prime());
    for (const auto& [m, s] : f.components()) {
        LaurentSeries shifted(f.prime(), s.low() - p * m, s.prec() - p * m,
                              [&] {
                                  std::vector<uint32_t> c;
                                  for (int64_t e = s.low(); e < s.prec(); ++e)
                                      c.push_back(static_cast<uint32_t>(s.coeff(e).value()));
                                  return c;
                              }());
        if (!shifted.is_zero()) r.comp.insert_or_assign(m, std::move(shifted));
    }
    return r;
}

inline DeltaSeries1 from_monomial_basis(const MonomialSeries1& f, int64_t mprime_max = 0) {
    DeltaSeries1 r(f.p, mprime_max);
    int64_t p = static_cast<int64_t>(f.p);
    for (const auto& [m, s] : f.comp) {
        std::vector<uint32_t> c;
        for (int64_t e = s.low(); e < s.prec(); ++e)
            c.push_back(static_cast<uint32_t>(s.coeff(e).value()));
        r.set_component(m, LaurentSeries(f.p, s.low() + p * m, s.prec() + p * m, std::move(c)));
    }
    return r;
}

// Hecke action away from p, componentwise in the (q'/q^p) basis:
// T_kappa(n) f = sum_{m'} n^{-m'} (T_{kappa+2m'}(n) f_{m'}) (q'/q^p)^{m'}.
inline DeltaSeries1 hecke_delta(const DeltaSeries1& f, int64_t n, int64_t kappa, int64_t N) {
    require(n >= 1 && n % static_cast<int64_t>(f.prime()) != 0, "invalid-input",
            "T(n) away from p requires gcd(n, p) = 1");
    DeltaSeries1 r(f.prime(), f.mprime_max());
    Fp ninv = Fp(n, f.prime()).inv();
    Fp scale = Fp(1, f.prime());
    int64_t last = 0;
    for (const auto& [m, s] : f.components()) {
        for (; last < m; ++last) scale = scale * ninv;
        r.set_component(m, hecke_classical(s, n, kappa + 2 * m, N).scaled(scale));
    }
    return r;
}

// Independent route: the congruence for the action on plain monomials,
// with output coefficient at q^{m - m'p} (q')^{m'} given by
// sum_{A|(n,m)} n^{-m'} eps(A) A^{kappa+2m'-1} a_{mn/A^2 - m'p, m'}.
inline MonomialSeries1 hecke_delta_monomial(const MonomialSeries1& f, int64_t n,
                                            int64_t kappa, int64_t N) {
    uint64_t p = f.p;
    int64_t ip = static_cast<int64_t>(p);
    require(n >= 1 && n % ip != 0, "invalid-input",
            "T(n) away from p requires gcd(n, p) = 1");
    MonomialSeries1 r{p, {}};
    auto divs = divisors_of(n);
    for (const auto& [mp, s] : f.comp) {
        // Work in the shifted index m = plain exponent + m'p.
        int64_t shift = mp * ip;
        int64_t lo_m = s.low() + shift, hi_m = s.prec() + shift;
        int64_t out_lo = lo_m < 0 ? lo_m * n : ceil_div(lo_m, n);
        int64_t out_hi = floor_div(hi_m, n);
        if (out_hi <= out_lo) continue;
        Fp nm = Fp(n, p).pow(-mp);
        std::vector<uint32_t> c(static_cast<size_t>(out_hi - out_lo), 0);
        for (int64_t m = out_lo; m < out_hi; ++m) {
            uint64_t acc = 0;
            for (int64_t A : divs) {
                if (m != 0 && m % A != 0) continue;
                if (std::gcd(A, N) != 1) continue;
                int64_t src = m * n / (A * A) - shift; // plain exponent in the source
                if (src < s.low()) continue;
                uint64_t term =
                    fpmod::mul(fpmod::pow_signed(fpmod::from_int(A, p), kappa + 2 * mp - 1, p),
                               s.coeff(src).value(), p);
                acc = fpmod::add(acc, term, p);
            }
            c[size_t(m - out_lo)] =
                static_cast<uint32_t>(fpmod::mul(acc, nm.value(), p));
        }
        LaurentSeries out(p, out_lo - shift, out_hi - shift, std::move(c));
        if (!out.is_zero()) r.comp.insert_or_assign(mp, std::move(out));
    }
    return r;
}

enum class Frobenius { F, F_k, F_rel };

// F_k fixes everything (coefficients lie in the prime field); F_rel sends
// q -> q^p, q' -> (q')^p, i.e. (m', f_{m'}(q)) -> (p m', f_{m'}(q^p)); F is
// their composition.
inline DeltaSeries1 frobenii(const DeltaSeries1& f, Frobenius which) {
    if (which == Frobenius::F_k) return f;
    DeltaSeries1 r(f.prime(), f.mprime_max());
    int64_t p = static_cast<int64_t>(f.prime());
    for (const auto& [m, s] : f.components()) {
        LaurentSeries img = v_classical(s);
        if (!img.is_zero()) r.set_component(p * m, std::move(img));
    }
    return r;
}

// V kills q' mod p: only the order-0 part survives, with q -> q^p.
inline DeltaSeries1 v_delta(const DeltaSeries1& f) {
    DeltaSeries1 r(f.prime(), f.mprime_max());
    if (const LaurentSeries* s = f.component(0)) r.set_component(0, v_classical(*s));
    return r;
}

// theta_1, the first delta-theta operator: a derivation vanishing on k((q))
// with theta_1(q'/q^p) = 1, so components shift down by one power.
inline DeltaSeries1 theta1(const DeltaSeries1& f) {
    DeltaSeries1 r(f.prime(), f.mprime_max());
    for (const auto& [m, s] : f.components())
        if (m >= 1) r.add_to_component(m - 1, s.scaled(Fp(m, f.prime())));
    return r;
}

inline bool is_primitive(const DeltaSeries1& f) {
    const LaurentSeries* s = f.component(0);
    return !s || u_classical(*s).is_zero();
}

struct EchelonFamily {
    LaurentSeries phi0;
    std::map<int64_t, LaurentSeries> phi; // m' >= 1 -> extracted phi_{m'}
};

inline int64_t vp_of(int64_t n, int64_t p) {
    int64_t v = 0;
    while (n % p == 0) { n /= p; ++v; }
    return v;
}

// Shape test for Hecke-stable holomorphic series: each f_{m'} must be a
// V^{v_p(m')+1}-image with preimage in q^{m'/p^{v_p(m')}} k[[q]].  Returns
// the extracted family, or nullopt with the offending m' reported via
// *offender when given.
inline std::optional<EchelonFamily> echelon_shape_check(const DeltaSeries1& f,
                                                        int64_t* offender = nullptr) {
    require(f.holomorphic_at_infinity(), "not-holomorphic",
            "echelon shape is defined for series holomorphic at infinity");
    int64_t p = static_cast<int64_t>(f.prime());
    EchelonFamily fam{f.component_or_zero(0, f.component(0) ? f.component(0)->prec() : 1), {}};
    for (const auto& [m, s] : f.components()) {
        if (m == 0) continue;
        int64_t v = vp_of(m, p);
        LaurentSeries phi = s;
        for (int64_t i = 0; i <= v; ++i) {
            // Membership in the image of V: all exponents divisible by p.
            bool in_image = true;
            for (int64_t e = phi.low(); e < phi.prec(); ++e)
                if (e % p != 0 && !phi.coeff(e).is_zero()) in_image = false;
            if (!in_image) {
                if (offender) *offender = m;
                return std::nullopt;
            }
            phi = u_classical(phi);
        }
        int64_t pv = 1;
        for (int64_t i = 0; i < v; ++i) pv *= p;
        if (!phi.is_zero() && phi.low() < m / pv) {
            if (offender) *offender = m;
            return std::nullopt;
        }
        fam.phi.insert_or_assign(m, std::move(phi));
    }
    return fam;
}

// Order-2 series mod p, stored in the (q'/q^p), (q''/q^{p^2}) basis with
// q-exponents recorded as the invariant weight m + m'p + m''p^2.
class DeltaSeries2 {
public:
    explicit DeltaSeries2(uint64_t p) : p_(p) {}

    uint64_t prime() const { return p_; }
    const std::map<std::pair<int64_t, int64_t>, LaurentSeries>& components() const {
        return comp_;
    }

    void set_component(int64_t mprime, int64_t mdprime, LaurentSeries s) {
        require(mprime >= 0 && mdprime >= 0, "invalid-input", "negative basis exponent");
        if (s.is_zero()) {
            comp_.erase({mprime, mdprime});
        } else {
            comp_.insert_or_assign({mprime, mdprime}, std::move(s));
        }
    }

    void add_to_component(int64_t mprime, int64_t mdprime, const LaurentSeries& s) {
        auto it = comp_.find({mprime, mdprime});
        if (it == comp_.end()) {
            set_component(mprime, mdprime, s);
        } else {
            set_component(mprime, mdprime, it->second + s);
        }
    }

    bool agrees_with(const DeltaSeries2& o) const {
        for (const auto& [k, s] : comp_) {
            auto it = o.comp_.find(k);
            if (!(it != o.comp_.end() ? s.agrees_with(it->second) : s.is_zero())) return false;
        }
        for (const auto& [k, t] : o.comp_)
            if (!comp_.count(k) && !t.is_zero()) return false;
        return true;
    }

    static DeltaSeries2 from_order1(const DeltaSeries1& f) {
        DeltaSeries2 r(f.prime());
        for (const auto& [m, s] : f.components()) r.set_component(m, 0, s);
        return r;
    }

    DeltaSeries1 to_order1(int64_t mprime_max = 0) const {
        DeltaSeries1 r(p_, mprime_max);
        for (const auto& [k, s] : comp_) {
            require(k.second == 0, "invalid-input", "series has q'' components");
            r.set_component(k.first, s);
        }
        return r;
    }

private:
    uint64_t p_;
    std::map<std::pair<int64_t, int64_t>, LaurentSeries> comp_;
};

// Order-2 Hecke congruence: the sum over AD = n, (A,N) = 1, D | weight of
//   A^{kappa-1} (A/D)^{m'+m''} a q^{A w/D} Psi^{m'}
//     [ q''/q^{p^2} + (delta(A/D)/(A/D)) Psi^p + ((A/D - 1)/2) Psi^{2p} ]^{m''}.
inline DeltaSeries2 hecke_delta_order2(const DeltaSeries2& f, int64_t n, int64_t kappa,
                                       int64_t N) {
    uint64_t p = f.prime();
    int64_t ip = static_cast<int64_t>(p);
    require(n >= 1 && n % ip != 0, "invalid-input",
            "T(n) away from p requires gcd(n, p) = 1");
    DeltaSeries2 r(p);
    auto divs = divisors_of(n);
    // Multinomial expansion state per (A, D): bracket powers.
    for (const auto& [key, s] : f.components()) {
        auto [mp, mpp] = key;
        require(mpp < ip, "invalid-input", "order-2 bracket power must stay below p");
        int64_t prec_out = floor_div(s.prec(), n);
        for (int64_t A : divs) {
            if (std::gcd(A, N) != 1) continue;
            int64_t D = n / A;
            Fp ratio = Fp(A, p) / Fp(D, p);
            Fp head = Fp(A, p).pow(kappa - 1) * ratio.pow(mp + mpp);
            Fp b2 = delta_rational(A, D, p) / ratio;        // delta(A/D) / (A/D)
            Fp b3 = (ratio - Fp(1, p)) / Fp(2, p);          // (A/D - 1)/2
            // [q''/q^{p^2} + b2 Psi^p + b3 Psi^{2p}]^{m''}: iterate (i, j, k).
            for (int64_t i = 0; i <= mpp; ++i) {
                for (int64_t j = 0; j + i <= mpp; ++j) {
                    int64_t k = mpp - i - j;
                    // Multinomial coefficient m''! / (i! j! k!) mod p.
                    uint64_t mc = 1;
                    {
                        uint64_t num = 1, den = 1;
                        for (int64_t t = 1; t <= mpp; ++t) num = fpmod::mul(num, t % p, p);
                        for (int64_t t = 1; t <= i; ++t) den = fpmod::mul(den, t % p, p);
                        for (int64_t t = 1; t <= j; ++t) den = fpmod::mul(den, t % p, p);
                        for (int64_t t = 1; t <= k; ++t) den = fpmod::mul(den, t % p, p);
                        mc = fpmod::mul(num, fpmod::inv(den, p), p);
                    }
                    Fp factor = head * Fp::raw(mc, p) * b2.pow(j) * b3.pow(k);
                    if (factor.is_zero()) continue;
                    int64_t out_mp = mp + ip * j + 2 * ip * k;
                    int64_t out_mpp = i;
                    for (int64_t w = s.low(); w < s.prec(); ++w) {
                        if (s.coeff(w).is_zero()) continue;
                        if (w % D != 0) continue; // D | m + m'p + m''p^2
                        int64_t out_w = A * (w / D);
                        if (out_w >= prec_out) continue;
                        r.add_to_component(
                            out_mp, out_mpp,
                            LaurentSeries::monomial(p, out_w, s.coeff(w) * factor, prec_out));
                    }
                }
            }
        }
    }
    return r;
}

} // namespace deltap
