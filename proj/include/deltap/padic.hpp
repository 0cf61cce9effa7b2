#pragma once

#include <cstdint>
#include <limits>
#include <string>

#include "deltap/errors.hpp"
#include "deltap/fp.hpp"

namespace deltap {

// Capped-precision p-adic numbers.  A nonzero value is p^val * unit with the
// unit coprime to p and known mod p^relprec (relprec digits of relative
// precision).  Cancellation can leave a value with no known digits; such a
// value is kept as a "zero class": known only to be divisible by p^abs.
// Valuations are hard-capped below at -kMaxDenom; crossing the cap throws
// instead of truncating.

inline constexpr int kMaxDenom = 4;
inline constexpr int kDefaultPadicDigits = 12;
inline constexpr int64_t kValInfinity = std::numeric_limits<int64_t>::max();

inline uint64_t pow_u64_checked(uint64_t b, int e) {
    uint64_t r = 1;
    for (int i = 0; i < e; ++i) {
        require(r <= (uint64_t(1) << 62) / b, "invalid-input",
                "p^M does not fit in a machine word");
        r *= b;
    }
    return r;
}

class Padic {
public:
    // Exact integer n, tracked with M digits of relative precision.
    Padic(int64_t n, uint64_t p, int M = kDefaultPadicDigits) : p_(p) {
        check_prime_field(p);
        require(M >= 1, "invalid-input", "padic precision must be >= 1");
        if (n == 0) {
            *this = exact_zero(p);
            return;
        }
        uint64_t mag = n < 0 ? static_cast<uint64_t>(-n) : static_cast<uint64_t>(n);
        val_ = 0;
        while (mag % p == 0) { mag /= p; ++val_; }
        uint64_t pm = pow_u64_checked(p, M);
        unit_ = mag % pm;
        if (n < 0) unit_ = pm - unit_;
        relprec_ = M;
        zeroclass_ = false;
    }

    static Padic exact_zero(uint64_t p) {
        Padic x;
        x.p_ = p;
        x.zeroclass_ = true;
        x.abs_ = kValInfinity;
        return x;
    }

    // Known only to be divisible by p^abs.
    static Padic zero_to_precision(uint64_t p, int64_t abs) {
        Padic x;
        x.p_ = p;
        x.zeroclass_ = true;
        x.abs_ = abs;
        return x;
    }

    static Padic from_unit(uint64_t p, int64_t val, uint64_t unit, int relprec) {
        Padic x;
        x.p_ = p;
        x.zeroclass_ = false;
        x.val_ = val;
        x.unit_ = unit % pow_u64_checked(p, relprec);
        x.relprec_ = relprec;
        require(x.unit_ % p != 0, "invalid-input", "padic unit must be coprime to p");
        x.check_cap();
        return x;
    }

    // n/d as an exact rational (d nonzero), M digits.
    static Padic from_rational(int64_t n, int64_t d, uint64_t p, int M = kDefaultPadicDigits) {
        require(d != 0, "division-by-zero", "rational with zero denominator");
        return Padic(n, p, M) / Padic(d, p, M);
    }

    uint64_t prime() const { return p_; }
    bool is_exact_zero() const { return zeroclass_ && abs_ == kValInfinity; }
    bool is_zero_class() const { return zeroclass_; }

    // Valuation; kValInfinity for exact zero.  A precision-limited zero has
    // no certain valuation and throws.
    int64_t valuation() const {
        if (!zeroclass_) return val_;
        if (abs_ == kValInfinity) return kValInfinity;
        fail("precision-exhausted", "valuation of a value with no known digits");
    }

    // Lower bound for the valuation, always available.
    int64_t valuation_at_least() const { return zeroclass_ ? abs_ : val_; }

    int relprec() const {
        require(!zeroclass_, "precision-exhausted", "no unit digits");
        return relprec_;
    }

    uint64_t unit() const {
        require(!zeroclass_, "precision-exhausted", "no unit digits");
        return unit_;
    }

    // Residue mod p, defined when the value is known integral.
    Fp residue_mod_p() const {
        if (zeroclass_) {
            require(abs_ >= 1, "precision-exhausted", "residue of an unknown value");
            return Fp::raw(0, p_);
        }
        require(val_ >= 0, "integrality-violation",
                "residue of a non-integral value (valuation " + std::to_string(val_) + ")");
        return val_ > 0 ? Fp::raw(0, p_) : Fp::raw(unit_ % p_, p_);
    }

    Padic operator-() const {
        if (zeroclass_) return *this;
        return from_unit(p_, val_, pow_u64_checked(p_, relprec_) - unit_, relprec_);
    }

    Padic operator+(const Padic& o) const {
        match(o);
        if (is_exact_zero()) return o;
        if (o.is_exact_zero()) return *this;
        // Absolute precision of the sum.
        int64_t abs = std::min(known_abs(), o.known_abs());
        int64_t v = std::min(valuation_at_least(), o.valuation_at_least());
        if (abs - v <= 0) return zero_to_precision(p_, abs);
        int digits = static_cast<int>(abs - v);
        uint64_t pm = pow_u64_checked(p_, digits);
        uint64_t s = fpmod::add(lift_digits(v, digits, pm), o.lift_digits(v, digits, pm), pm);
        return normalize(p_, v, s, digits);
    }

    Padic operator-(const Padic& o) const { return *this + (-o); }

    Padic operator*(const Padic& o) const {
        match(o);
        if (is_exact_zero() || o.is_exact_zero()) return exact_zero(p_);
        if (zeroclass_ || o.zeroclass_) {
            // p^a Z_p * p^b U  subset  p^{a+b} Z_p.
            return zero_to_precision(p_, valuation_at_least() + o.valuation_at_least());
        }
        int digits = std::min(relprec_, o.relprec_);
        uint64_t pm = pow_u64_checked(p_, digits);
        return from_unit(p_, val_ + o.val_, fpmod::mul(unit_ % pm, o.unit_ % pm, pm), digits);
    }

    Padic operator/(const Padic& o) const {
        match(o);
        require(!o.is_exact_zero(), "division-by-zero", "padic division by zero");
        require(!o.zeroclass_, "precision-exhausted", "division by a value with no known digits");
        if (is_exact_zero()) return exact_zero(p_);
        if (zeroclass_) return zero_to_precision(p_, abs_ - o.val_);
        int digits = std::min(relprec_, o.relprec_);
        uint64_t pm = pow_u64_checked(p_, digits);
        // phi(p^digits) = pm - pm/p, so u^{phi-1} inverts a unit mod p^digits.
        uint64_t oinv = fpmod::pow(o.unit_ % pm, pm - pm / p_ - 1, pm);
        return from_unit(p_, val_ - o.val_, fpmod::mul(unit_ % pm, oinv, pm), digits);
    }

    // Equality of the known parts: both values agree mod p^a where a is the
    // common absolute precision.
    bool agrees_with(const Padic& o) const {
        match(o);
        int64_t abs = std::min(known_abs(), o.known_abs());
        if (abs == kValInfinity) return is_exact_zero() && o.is_exact_zero();
        int64_t v = std::min(valuation_at_least(), o.valuation_at_least());
        if (abs - v <= 0) return true;
        int digits = static_cast<int>(abs - v);
        uint64_t pm = pow_u64_checked(p_, digits);
        return lift_digits(v, digits, pm) == o.lift_digits(v, digits, pm);
    }

private:
    Padic() = default;

    void match(const Padic& o) const {
        require(p_ == o.p_, "invalid-input", "mixed primes in padic arithmetic");
    }

    void check_cap() const {
        require(zeroclass_ || val_ >= -kMaxDenom, "invalid-input",
                "padic valuation below -maxdenom cap");
    }

    // The value is known mod p^known_abs.
    int64_t known_abs() const { return zeroclass_ ? abs_ : val_ + relprec_; }

    // Digits of p^{-base} * value, mod p^digits.
    uint64_t lift_digits(int64_t base, int digits, uint64_t pm) const {
        if (zeroclass_) return 0;
        int shift = static_cast<int>(val_ - base);
        if (shift >= digits) return 0;
        return fpmod::mul(unit_ % pm, pow_u64_checked(p_, shift), pm);
    }

    static Padic normalize(uint64_t p, int64_t base, uint64_t digits_value, int digits) {
        if (digits_value == 0) return zero_to_precision(p, base + digits);
        int shift = 0;
        while (digits_value % p == 0) { digits_value /= p; ++shift; }
        int rel = digits - shift;
        if (rel <= 0) return zero_to_precision(p, base + digits);
        return from_unit(p, base + shift, digits_value, rel);
    }

    uint64_t p_ = 5;
    bool zeroclass_ = true;
    int64_t val_ = 0;      // valuation (unit form)
    uint64_t unit_ = 0;    // unit digits mod p^relprec
    int relprec_ = 0;
    int64_t abs_ = kValInfinity; // zero-class: divisible by p^abs
};

enum class PadicOp { add, mul, div };

inline Padic padic_arith(const Padic& a, const Padic& b, PadicOp op) {
    switch (op) {
        case PadicOp::add: return a + b;
        case PadicOp::mul: return a * b;
        case PadicOp::div: return a / b;
    }
    fail("invalid-input", "unknown padic op");
}

} // namespace deltap
