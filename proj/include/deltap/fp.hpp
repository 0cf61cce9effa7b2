#pragma once

#include <cstdint>
#include <numeric>
#include <string>

#include "deltap/errors.hpp"

namespace deltap {

// Arithmetic in the prime field F_p for a word-sized odd prime p >= 5.
// Raw helpers work on residues in [0, p); the Fp value type carries its
// prime along so mixed-prime operations fail loudly.

namespace fpmod {

inline uint64_t add(uint64_t a, uint64_t b, uint64_t p) {
    uint64_t s = a + b;
    return s >= p ? s - p : s;
}

inline uint64_t sub(uint64_t a, uint64_t b, uint64_t p) {
    return a >= b ? a - b : a + p - b;
}

inline uint64_t neg(uint64_t a, uint64_t p) { return a == 0 ? 0 : p - a; }

inline uint64_t mul(uint64_t a, uint64_t b, uint64_t p) {
    return static_cast<uint64_t>(static_cast<unsigned __int128>(a) * b % p);
}

inline uint64_t pow(uint64_t a, uint64_t e, uint64_t p) {
    uint64_t r = 1 % p;
    a %= p;
    while (e) {
        if (e & 1) r = mul(r, a, p);
        a = mul(a, a, p);
        e >>= 1;
    }
    return r;
}

// Fermat inversion; p is prime by contract.
inline uint64_t inv(uint64_t a, uint64_t p) {
    require(a % p != 0, "division-by-zero", "inverse of 0 in F_" + std::to_string(p));
    return pow(a % p, p - 2, p);
}

// Reduce a signed integer into [0, p).
inline uint64_t from_int(int64_t v, uint64_t p) {
    int64_t r = v % static_cast<int64_t>(p);
    if (r < 0) r += static_cast<int64_t>(p);
    return static_cast<uint64_t>(r);
}

// x^e with a possibly negative exponent (x must be nonzero when e < 0).
inline uint64_t pow_signed(uint64_t x, int64_t e, uint64_t p) {
    if (e >= 0) return pow(x, static_cast<uint64_t>(e), p);
    return pow(inv(x, p), static_cast<uint64_t>(-e), p);
}

} // namespace fpmod

inline bool is_prime_u64(uint64_t n) {
    if (n < 2) return false;
    for (uint64_t d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

inline void check_prime_field(uint64_t p) {
    require(p >= 5 && is_prime_u64(p), "invalid-input",
            "p must be a prime >= 5, got " + std::to_string(p));
}

class Fp {
public:
    Fp() : v_(0), p_(5) {}
    Fp(int64_t v, uint64_t p) : v_(fpmod::from_int(v, p)), p_(p) {}

    uint64_t value() const { return v_; }
    uint64_t prime() const { return p_; }
    bool is_zero() const { return v_ == 0; }

    Fp operator+(Fp o) const { match(o); return raw(fpmod::add(v_, o.v_, p_), p_); }
    Fp operator-(Fp o) const { match(o); return raw(fpmod::sub(v_, o.v_, p_), p_); }
    Fp operator*(Fp o) const { match(o); return raw(fpmod::mul(v_, o.v_, p_), p_); }
    Fp operator/(Fp o) const { match(o); return raw(fpmod::mul(v_, fpmod::inv(o.v_, p_), p_), p_); }
    Fp operator-() const { return raw(fpmod::neg(v_, p_), p_); }

    Fp& operator+=(Fp o) { return *this = *this + o; }
    Fp& operator-=(Fp o) { return *this = *this - o; }
    Fp& operator*=(Fp o) { return *this = *this * o; }

    bool operator==(Fp o) const { return p_ == o.p_ && v_ == o.v_; }
    bool operator!=(Fp o) const { return !(*this == o); }

    Fp inv() const { return raw(fpmod::inv(v_, p_), p_); }
    Fp pow(int64_t e) const { return raw(fpmod::pow_signed(v_, e, p_), p_); }

    static Fp raw(uint64_t v, uint64_t p) {
        Fp x;
        x.v_ = v;
        x.p_ = p;
        return x;
    }

private:
    void match(Fp o) const {
        require(p_ == o.p_, "invalid-input", "mixed primes in F_p arithmetic");
    }

    uint64_t v_;
    uint64_t p_;
};

inline Fp fp_inv(Fp x) { return x.inv(); }

// delta of a rational unit A/D:  delta(x) = (x - x^p)/p  evaluated mod p,
// well defined via x taken mod p^2 (phi fixes rationals in Z_p).
inline Fp delta_rational(int64_t A, int64_t D, uint64_t p) {
    check_prime_field(p);
    require(A % static_cast<int64_t>(p) != 0 && D % static_cast<int64_t>(p) != 0,
            "invalid-input", "delta_rational needs gcd(AD, p) = 1");
    uint64_t p2 = p * p;
    uint64_t x = fpmod::mul(fpmod::from_int(A, p2),
                            fpmod::pow(fpmod::from_int(D, p2), p2 - p - 1, p2), p2);
    // p2 - p - 1 = phi(p^2) - 1 gives the inverse of D mod p^2.
    uint64_t xp = fpmod::pow(x, p, p2);
    uint64_t diff = fpmod::sub(x, xp, p2);
    return Fp::raw((diff / p) % p, p);
}

} // namespace deltap
