#pragma once

#include <algorithm>
#include <array>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "deltap/symmetry.hpp"

namespace deltap {

// Brute-force route for "pU": expand Sigma_p f over p variable pairs
// (q_j, q'_j), solve for the unique preimage G in the elementary symmetric
// functions s_i and their delta-images s'_i by exact linear algebra over
// F_p, and read off the substitution s = (0,..,0,q), s' = (0,..,0,q').
//
// The solve is graded: with q_j of weight 1 and q'_j of weight p, the map
// s_i -> S_i, s'_i -> delta S_i is weighted-homogeneous (s_i of weight i,
// s'_i of weight p i), and writing s'_i = l_i + Gamma_i(s) with l_i the
// q'-linear part of delta S_i splits the system into independent blocks
// indexed by (weight, q'-degree).  Each block has full column rank, so a
// precomputed inverse of a maximal square submatrix solves every right
// hand side; a final in-block residual check detects non-symmetric input.

// ---------------------------------------------------------------------------
// Monomials in q_1..q_p, q'_1..q'_p: one packed 9-bit cell (alpha<<3 | beta)
// per column.  Orbit representatives are sorted descending.
// ---------------------------------------------------------------------------

inline constexpr int kMaxPairs = 7; // p <= 7

using BCols = std::array<uint16_t, kMaxPairs>;

inline uint64_t pack_cols(const BCols& c, int p) {
    uint64_t k = 0;
    for (int i = 0; i < p; ++i) k |= static_cast<uint64_t>(c[size_t(i)]) << (9 * i);
    return k;
}

inline BCols unpack_cols(uint64_t k, int p) {
    BCols c{};
    for (int i = 0; i < p; ++i) c[size_t(i)] = static_cast<uint16_t>((k >> (9 * i)) & 0x1ff);
    return c;
}

inline void sort_cols_desc(BCols& c, int p) {
    std::sort(c.begin(), c.begin() + p, std::greater<uint16_t>());
}

inline int64_t cols_weight(const BCols& c, int p) {
    int64_t w = 0;
    for (int i = 0; i < p; ++i) w += (c[size_t(i)] >> 3) + int64_t(p) * (c[size_t(i)] & 7);
    return w;
}

inline int64_t cols_qdeg(const BCols& c, int p) {
    int64_t d = 0;
    for (int i = 0; i < p; ++i) d += c[size_t(i)] & 7;
    return d;
}

// Number of distinct permutations of the columns (exact integer).
inline uint64_t cols_perm_count(const BCols& sorted, int p) {
    uint64_t fact[8] = {1, 1, 2, 6, 24, 120, 720, 5040};
    uint64_t n = fact[p];
    int run = 1;
    for (int i = 1; i < p; ++i) {
        if (sorted[size_t(i)] == sorted[size_t(i - 1)]) {
            ++run;
        } else {
            n /= fact[run];
            run = 1;
        }
    }
    n /= fact[run];
    return n;
}

// Symmetric polynomial stored by orbit representative; `index` mirrors
// `terms` for O(1) lookups during multiplication.
struct OrbitPoly {
    std::vector<std::pair<uint64_t, uint32_t>> terms; // sorted by key
    std::unordered_map<uint64_t, uint32_t> index;

    void finish() {
        std::sort(terms.begin(), terms.end());
        index.clear();
        index.reserve(terms.size() * 2);
        for (auto& [k, v] : terms) index.emplace(k, v);
    }

    static OrbitPoly one(int p) {
        OrbitPoly r;
        BCols z{};
        r.terms.push_back({pack_cols(z, p), 1});
        r.finish();
        return r;
    }
};

// Small symmetric factor given as its full monomial list.
struct FactorPoly {
    std::vector<std::pair<BCols, uint32_t>> monomials;
};

// Orbit-basis product A * B (B symmetric, given in full).  Two passes: the
// support of the product is {sort(rep + y)}, and the representative
// coefficient is C(nu) = sum_y B(y) A(sort(nu - y)).
inline OrbitPoly orbit_multiply(const OrbitPoly& a, const FactorPoly& b, uint64_t prime,
                                int p) {
    std::vector<uint64_t> support;
    support.reserve(a.terms.size() * b.monomials.size());
    for (const auto& [ak, av] : a.terms) {
        (void)av;
        BCols ac = unpack_cols(ak, p);
        for (const auto& m : b.monomials) {
            const BCols& yc = m.first;
            BCols s{};
            for (int i = 0; i < p; ++i) s[size_t(i)] = static_cast<uint16_t>(ac[size_t(i)] + yc[size_t(i)]);
            sort_cols_desc(s, p);
            support.push_back(pack_cols(s, p));
        }
    }
    std::sort(support.begin(), support.end());
    support.erase(std::unique(support.begin(), support.end()), support.end());

    OrbitPoly out;
    out.terms.reserve(support.size());
    for (uint64_t nk : support) {
        BCols nc = unpack_cols(nk, p);
        uint64_t acc = 0;
        for (const auto& [yc, yv] : b.monomials) {
            BCols x{};
            bool ok = true;
            for (int i = 0; i < p && ok; ++i) {
                uint16_t n = nc[size_t(i)], y = yc[size_t(i)];
                if ((n & 7) < (y & 7) || (n >> 3) < (y >> 3)) ok = false;
                x[size_t(i)] = static_cast<uint16_t>(n - y);
            }
            if (!ok) continue;
            sort_cols_desc(x, p);
            auto it = a.index.find(pack_cols(x, p));
            if (it == a.index.end()) continue;
            acc = fpmod::add(acc, fpmod::mul(it->second, yv, prime), prime);
        }
        if (acc) out.terms.push_back({nk, static_cast<uint32_t>(acc)});
    }
    out.finish();
    return out;
}

// ---------------------------------------------------------------------------
// Public domain type: a truncated polynomial in B = k[q_1..q_p, q'_1..q'_p].
// ---------------------------------------------------------------------------

struct MultiPoly {
    uint64_t p;
    int64_t wcap;     // weighted degree cap W
    int64_t exact_to; // coefficients of weight < exact_to are exact
    std::map<uint64_t, uint32_t> terms; // packed full monomial -> coefficient

    void add_term(uint64_t key, uint64_t coeff) {
        uint64_t v = fpmod::add(terms.count(key) ? terms[key] : 0, coeff % p, p);
        if (v == 0) {
            terms.erase(key);
        } else {
            terms[key] = static_cast<uint32_t>(v);
        }
    }
};

// Substitute (q_j, q'_j) for (q, q') per variable pair and sum over j,
// keeping weighted degree <= W.  Taylor case only.
inline MultiPoly sigma_p_expand(const DeltaSeries1& f, int64_t W) {
    uint64_t prime = f.prime();
    int p = static_cast<int>(prime);
    require(p <= kMaxPairs, "invalid-input", "oracle supports p <= 7");
    require(W >= p, "invalid-input", "weight cap must be at least p");
    require(W <= std::min<int64_t>(63, 7 * p), "invalid-input",
            "weight cap too large for packed monomials");
    require(f.holomorphic_at_infinity(), "not-holomorphic",
            "sigma_p expansion is implemented for the Taylor case");

    MultiPoly P{prime, W, W + 1, {}};
    for (const auto& [mp, s] : f.components()) {
        P.exact_to = std::min(P.exact_to, s.prec());
        require(mp <= 7, "invalid-input", "q' exponent too large for packed monomials");
        for (int64_t e = s.low(); e < s.prec() && e <= W; ++e) {
            Fp c = s.coeff(e);
            if (c.is_zero()) continue;
            int64_t alpha = e - static_cast<int64_t>(prime) * mp; // plain q exponent
            for (int j = 0; j < p; ++j) {
                BCols cols{};
                cols[size_t(j)] = static_cast<uint16_t>((alpha << 3) | mp);
                P.add_term(pack_cols(cols, p), c.value());
            }
        }
    }
    return P;
}

// ---------------------------------------------------------------------------
// Sparse polynomials in s_1..s_p, s'_1..s'_p (the A-side).
// ---------------------------------------------------------------------------

using SKey = std::array<uint8_t, 2 * kMaxPairs>; // e[0..6] then f[7..13]

struct SPoly {
    std::map<SKey, uint32_t> terms;

    void add(const SKey& k, uint64_t c, uint64_t prime) {
        auto it = terms.find(k);
        uint64_t v = fpmod::add(it == terms.end() ? 0 : it->second, c % prime, prime);
        if (v == 0) {
            if (it != terms.end()) terms.erase(it);
        } else {
            terms[k] = static_cast<uint32_t>(v);
        }
    }
};

inline SPoly spoly_scale(const SPoly& a, uint64_t c, uint64_t prime) {
    SPoly out;
    for (const auto& [k, v] : a.terms) {
        uint64_t w = fpmod::mul(v, c, prime);
        if (w) out.terms[k] = static_cast<uint32_t>(w);
    }
    return out;
}

inline SPoly spoly_mul(const SPoly& a, const SPoly& b, uint64_t prime) {
    SPoly out;
    for (const auto& [ka, va] : a.terms)
        for (const auto& [kb, vb] : b.terms) {
            SKey k{};
            for (size_t i = 0; i < k.size(); ++i)
                k[i] = static_cast<uint8_t>(ka[i] + kb[i]);
            out.add(k, fpmod::mul(va, vb, prime), prime);
        }
    return out;
}

struct SymSolveResult {
    uint64_t p;
    SPoly G;            // preimage in s, s' (valid when !residual)
    bool residual;      // true when no exact fit exists within safe_degree
    int64_t safe_degree; // weighted degree up to which G is certified
    std::string detail;  // human-readable reason when residual
};

// ---------------------------------------------------------------------------
// The cached solver for a fixed (p, W).
// ---------------------------------------------------------------------------

class SymSolver {
public:
    SymSolver(uint64_t prime, int64_t W, bool reverse_cols = false)
        : prime_(prime), p_(static_cast<int>(prime)), W_(W), reverse_(reverse_cols) {
        check_prime_field(prime);
        require(p_ <= kMaxPairs, "invalid-input", "oracle supports p <= 7");
        require(W >= p_ && W <= std::min<int64_t>(63, 7 * p_), "invalid-input",
                "oracle weight cap must satisfy p <= W <= min(63, 7p)");
        build_factors();
        enumerate_columns();
        finalize_blocks();
        build_gammas();
    }

    uint64_t prime() const { return prime_; }
    int64_t wcap() const { return W_; }

    SymSolveResult solve(const MultiPoly& P) const;

    // Gamma_i(s): the pure-s part of delta S_i, i.e. delta S_i = l_i + Gamma_i.
    const SPoly& gamma(int i) const { return gammas_.at(size_t(i)); }

private:
    struct Block {
        std::vector<SKey> cols;
        std::vector<uint64_t> row_orbit;
        std::unordered_map<uint64_t, int> row_of;
        std::vector<uint32_t> col_start; // CSR, size cols+1
        std::vector<uint16_t> ent_row;
        std::vector<uint8_t> ent_val;
        std::vector<int32_t> sel;  // selected row per column
        std::vector<uint8_t> inv;  // cols x cols inverse of M[sel, :]
    };

    void build_factors();
    void enumerate_columns();
    void gen_g(int from, SKey& eg, const OrbitPoly& poly, int64_t weight, int64_t deg);
    void gen_e(int from, SKey& eg, const OrbitPoly& poly, int64_t weight, int64_t deg);
    void record_column(const SKey& eg, const OrbitPoly& poly, int64_t weight, int64_t deg);
    void finalize_blocks();
    void build_gammas();

    uint64_t prime_;
    int p_;
    int64_t W_;
    bool reverse_;

    std::vector<FactorPoly> s_factors_;     // S_1..S_p (index 1..p)
    std::vector<FactorPoly> l_factors_;     // l_1..l_p
    std::vector<FactorPoly> gamma_full_;    // Gamma_i as B-side monomial lists
    std::vector<SPoly> gammas_;             // Gamma_i in the s basis

    struct RawCol {
        SKey eg;
        std::vector<std::pair<uint64_t, uint32_t>> entries;
    };
    std::map<std::pair<int64_t, int64_t>, std::vector<RawCol>> raw_;
    std::map<std::pair<int64_t, int64_t>, Block> blocks_;
};

// S_i, the q'-linear parts l_i of delta S_i, and the pure-q remainders
// Gamma_i computed exactly from the mod-p^2 lift.
inline void SymSolver::build_factors() {
    s_factors_.resize(size_t(p_) + 1);
    l_factors_.resize(size_t(p_) + 1);
    gamma_full_.resize(size_t(p_) + 1);

    // S_i: all i-subsets with (alpha, beta) = (1, 0).
    for (int i = 1; i <= p_; ++i) {
        for (uint32_t mask = 0; mask < (1u << p_); ++mask) {
            if (__builtin_popcount(mask) != i) continue;
            BCols c{};
            for (int j = 0; j < p_; ++j)
                if (mask & (1u << j)) c[size_t(j)] = 1 << 3;
            s_factors_[size_t(i)].monomials.push_back({c, 1});
        }
    }

    // l_i = sum_j e_{i-1}(q^p without j) q'_j.
    for (int i = 1; i <= p_; ++i) {
        for (int j = 0; j < p_; ++j) {
            for (uint32_t mask = 0; mask < (1u << p_); ++mask) {
                if (mask & (1u << j)) continue;
                if (__builtin_popcount(mask) != i - 1) continue;
                BCols c{};
                for (int t = 0; t < p_; ++t)
                    if (mask & (1u << t)) c[size_t(t)] = static_cast<uint16_t>(p_ << 3);
                c[size_t(j)] = static_cast<uint16_t>((c[size_t(j)]) | 1);
                l_factors_[size_t(i)].monomials.push_back({c, 1});
            }
        }
    }

    // Gamma_i = (S_i(x^p) - S_i(x)^p)/p mod p, via exact arithmetic mod p^2.
    uint64_t p2 = prime_ * prime_;
    for (int i = 1; i <= p_; ++i) {
        if (static_cast<int64_t>(prime_) * i > W_) break;
        // S_i(x)^p as a sparse integer polynomial mod p^2, exponent vectors
        // packed 8 bits per variable.
        std::unordered_map<uint64_t, uint64_t> pw;
        pw[0] = 1;
        for (int rep = 0; rep < p_; ++rep) {
            std::unordered_map<uint64_t, uint64_t> nx;
            nx.reserve(pw.size() * s_factors_[size_t(i)].monomials.size());
            for (const auto& [k, v] : pw) {
                for (const auto& [mc, mv] : s_factors_[size_t(i)].monomials) {
                    uint64_t k2 = k;
                    for (int t = 0; t < p_; ++t)
                        if (mc[size_t(t)]) k2 += uint64_t(1) << (8 * t);
                    auto& slot = nx[k2];
                    slot = (slot + v) % p2;
                }
            }
            pw.swap(nx);
        }
        // pw now holds S_i(x)^p; subtract S_i(x^p) so that pw = -(p Gamma_i).
        for (const auto& [mc, mv] : s_factors_[size_t(i)].monomials) {
            uint64_t k = 0;
            for (int t = 0; t < p_; ++t)
                if (mc[size_t(t)]) k += uint64_t(prime_) << (8 * t);
            auto& slot = pw[k];
            slot = (slot + p2 - mv % p2) % p2;
        }
        std::vector<std::pair<uint64_t, uint32_t>> packed;
        for (const auto& [k, v] : pw) {
            if (v == 0) continue;
            require(v % prime_ == 0, "invalid-input", "Gamma lift not divisible by p");
            uint64_t coeff = (prime_ - (v / prime_) % prime_) % prime_; // minus sign
            if (coeff == 0) continue;
            BCols c{};
            for (int t = 0; t < p_; ++t) {
                uint64_t a = (k >> (8 * t)) & 0xff;
                require(a <= 63, "invalid-input", "Gamma exponent overflow");
                c[size_t(t)] = static_cast<uint16_t>(a << 3);
            }
            packed.push_back({pack_cols(c, p_), static_cast<uint32_t>(coeff)});
        }
        std::sort(packed.begin(), packed.end());
        for (const auto& [k, coeff] : packed)
            gamma_full_[size_t(i)].monomials.push_back({unpack_cols(k, p_), coeff});
    }
}

inline void SymSolver::record_column(const SKey& eg, const OrbitPoly& poly, int64_t weight,
                                     int64_t deg) {
    RawCol rc;
    rc.eg = eg;
    rc.entries = poly.terms;
    raw_[{weight, deg}].push_back(std::move(rc));
}

inline void SymSolver::gen_e(int from, SKey& eg, const OrbitPoly& poly, int64_t weight,
                             int64_t deg) {
    record_column(eg, poly, weight, deg);
    for (int i = from; i <= p_; ++i) {
        if (weight + i > W_) break;
        ++eg[size_t(i - 1)];
        OrbitPoly next = orbit_multiply(poly, s_factors_[size_t(i)], prime_, p_);
        gen_e(i, eg, next, weight + i, deg);
        --eg[size_t(i - 1)];
    }
}

inline void SymSolver::gen_g(int from, SKey& eg, const OrbitPoly& poly, int64_t weight,
                             int64_t deg) {
    gen_e(1, eg, poly, weight, deg);
    for (int i = from; i <= p_; ++i) {
        if (weight + static_cast<int64_t>(prime_) * i > W_) break;
        ++eg[size_t(kMaxPairs + i - 1)];
        OrbitPoly next = orbit_multiply(poly, l_factors_[size_t(i)], prime_, p_);
        gen_g(i, eg, next, weight + static_cast<int64_t>(prime_) * i, deg + 1);
        --eg[size_t(kMaxPairs + i - 1)];
    }
}

inline void SymSolver::enumerate_columns() {
    SKey eg{};
    gen_g(1, eg, OrbitPoly::one(p_), 0, 0);
}

inline void SymSolver::finalize_blocks() {
    for (auto& [key, raws] : raw_) {
        if (reverse_) std::reverse(raws.begin(), raws.end());
        Block blk;
        for (const auto& rc : raws) {
            for (const auto& [orbit, val] : rc.entries) {
                if (!blk.row_of.count(orbit)) {
                    blk.row_of.emplace(orbit, static_cast<int>(blk.row_orbit.size()));
                    blk.row_orbit.push_back(orbit);
                }
            }
        }
        size_t rows = blk.row_orbit.size(), cols = raws.size();
        blk.col_start.push_back(0);
        for (const auto& rc : raws) {
            blk.cols.push_back(rc.eg);
            for (const auto& [orbit, val] : rc.entries) {
                blk.ent_row.push_back(static_cast<uint16_t>(blk.row_of.at(orbit)));
                blk.ent_val.push_back(static_cast<uint8_t>(val));
            }
            blk.col_start.push_back(static_cast<uint32_t>(blk.ent_row.size()));
        }

        // Greedy column elimination to pick rows whose square submatrix is
        // invertible; the map has full column rank, so this always succeeds.
        std::vector<uint32_t> work(rows * cols, 0);
        for (size_t c = 0; c < cols; ++c)
            for (uint32_t t = blk.col_start[c]; t < blk.col_start[c + 1]; ++t)
                work[c * rows + blk.ent_row[t]] = blk.ent_val[t];
        std::vector<char> used(rows, 0);
        blk.sel.assign(cols, -1);
        for (size_t c = 0; c < cols; ++c) {
            uint32_t* colc = work.data() + c * rows;
            size_t r = rows;
            for (size_t t = 0; t < rows; ++t)
                if (!used[t] && colc[t]) { r = t; break; }
            require(r < rows, "invalid-input", "oracle block lost column rank");
            used[r] = 1;
            blk.sel[c] = static_cast<int32_t>(r);
            uint64_t pivinv = fpmod::inv(colc[r], prime_);
            for (size_t c2 = c + 1; c2 < cols; ++c2) {
                uint32_t* col2 = work.data() + c2 * rows;
                uint64_t f = fpmod::mul(col2[r], pivinv, prime_);
                if (!f) continue;
                uint64_t nf = prime_ - f;
                for (size_t t = 0; t < rows; ++t)
                    col2[t] = static_cast<uint32_t>((col2[t] + nf * colc[t]) % prime_);
            }
        }

        // Invert the selected square submatrix by Gauss-Jordan.
        size_t n = cols;
        std::vector<int32_t> selidx(rows, -1);
        for (size_t i = 0; i < n; ++i) selidx[size_t(blk.sel[i])] = static_cast<int32_t>(i);
        std::vector<uint32_t> aug(n * 2 * n, 0);
        for (size_t c = 0; c < n; ++c)
            for (uint32_t t = blk.col_start[c]; t < blk.col_start[c + 1]; ++t) {
                int32_t si = selidx[blk.ent_row[t]];
                if (si >= 0) aug[size_t(si) * 2 * n + c] = blk.ent_val[t];
            }
        for (size_t i = 0; i < n; ++i) aug[i * 2 * n + n + i] = 1;
        for (size_t c = 0; c < n; ++c) {
            size_t piv = n;
            for (size_t r = c; r < n; ++r)
                if (aug[r * 2 * n + c]) { piv = r; break; }
            require(piv < n, "invalid-input", "oracle submatrix is singular");
            if (piv != c)
                for (size_t t = 0; t < 2 * n; ++t) std::swap(aug[piv * 2 * n + t], aug[c * 2 * n + t]);
            uint64_t inv = fpmod::inv(aug[c * 2 * n + c], prime_);
            for (size_t t = 0; t < 2 * n; ++t)
                aug[c * 2 * n + t] = static_cast<uint32_t>(aug[c * 2 * n + t] * inv % prime_);
            for (size_t r = 0; r < n; ++r) {
                if (r == c) continue;
                uint64_t f = aug[r * 2 * n + c];
                if (!f) continue;
                uint64_t nf = prime_ - f;
                for (size_t t = 0; t < 2 * n; ++t)
                    aug[r * 2 * n + t] =
                        static_cast<uint32_t>((aug[r * 2 * n + t] + nf * aug[c * 2 * n + t]) % prime_);
            }
        }
        blk.inv.resize(n * n);
        for (size_t r = 0; r < n; ++r)
            for (size_t c = 0; c < n; ++c)
                blk.inv[r * n + c] = static_cast<uint8_t>(aug[r * 2 * n + n + c]);

        blocks_.emplace(key, std::move(blk));
    }
    raw_.clear();
}

// Express Gamma_i in the s basis by solving its own block (weight p i, 0).
inline void SymSolver::build_gammas() {
    gammas_.resize(size_t(p_) + 1);
    for (int i = 1; i <= p_; ++i) {
        if (static_cast<int64_t>(prime_) * i > W_) break;
        const Block& blk = blocks_.at({static_cast<int64_t>(prime_) * i, 0});
        size_t n = blk.cols.size();
        std::vector<uint32_t> b(blk.row_orbit.size(), 0);
        for (const auto& [mc, mv] : gamma_full_[size_t(i)].monomials) {
            BCols s = mc;
            sort_cols_desc(s, p_);
            if (pack_cols(s, p_) != pack_cols(mc, p_)) continue; // keep representatives
            auto it = blk.row_of.find(pack_cols(s, p_));
            require(it != blk.row_of.end(), "invalid-input", "Gamma orbit outside block rows");
            b[size_t(it->second)] = mv;
        }
        std::vector<uint32_t> x(n, 0);
        for (size_t r = 0; r < n; ++r) {
            uint64_t acc = 0;
            for (size_t c = 0; c < n; ++c)
                acc += uint64_t(blk.inv[r * n + c]) * b[size_t(blk.sel[c])];
            x[r] = static_cast<uint32_t>(acc % prime_);
        }
        std::vector<uint64_t> check(blk.row_orbit.size(), 0);
        for (size_t c = 0; c < n; ++c) {
            if (!x[c]) continue;
            for (uint32_t t = blk.col_start[c]; t < blk.col_start[c + 1]; ++t)
                check[blk.ent_row[t]] += uint64_t(x[c]) * blk.ent_val[t];
        }
        for (size_t r = 0; r < check.size(); ++r)
            require(check[r] % prime_ == b[r], "invalid-input",
                    "Gamma failed to symmetrize (internal)");
        for (size_t c = 0; c < n; ++c)
            if (x[c]) gammas_[size_t(i)].terms[blk.cols[c]] = x[c];
    }
}

inline SymSolveResult SymSolver::solve(const MultiPoly& P) const {
    require(P.p == prime_ && P.wcap == W_, "invalid-input", "solver/poly mismatch");
    SymSolveResult res{prime_, {}, false, std::min<int64_t>(W_, P.exact_to - 1), ""};

    // Permutation-symmetry check and orbit aggregation.
    std::map<uint64_t, uint32_t> orbit_coeff;
    std::map<uint64_t, uint64_t> orbit_count;
    for (const auto& [k, v] : P.terms) {
        BCols c = unpack_cols(k, p_);
        sort_cols_desc(c, p_);
        uint64_t rep = pack_cols(c, p_);
        auto it = orbit_coeff.find(rep);
        if (it == orbit_coeff.end()) {
            orbit_coeff[rep] = v;
            orbit_count[rep] = 1;
        } else {
            require(it->second == v, "not-permutation-symmetric",
                    "coefficients differ within an orbit");
            ++orbit_count[rep];
        }
    }
    for (const auto& [rep, cnt] : orbit_count) {
        BCols c = unpack_cols(rep, p_);
        require(cnt == cols_perm_count(c, p_), "not-permutation-symmetric",
                "orbit is only partially present");
    }

    // Group by (weight, q'-degree); ignore slices beyond the exact range.
    std::map<std::pair<int64_t, int64_t>, std::vector<std::pair<uint64_t, uint32_t>>> slices;
    for (const auto& [rep, v] : orbit_coeff) {
        BCols c = unpack_cols(rep, p_);
        int64_t w = cols_weight(c, p_);
        if (w > res.safe_degree) continue;
        slices[{w, cols_qdeg(c, p_)}].push_back({rep, v});
    }

    // Per-block solve + residual verification.
    std::map<SKey, uint32_t> ghat; // coefficients in the (s, l) coordinates
    for (const auto& [key, entries] : slices) {
        auto bit = blocks_.find(key);
        if (bit == blocks_.end()) {
            res.residual = true;
            res.detail = "no candidate monomials at weight " + std::to_string(key.first) +
                         ", q'-degree " + std::to_string(key.second);
            return res;
        }
        const Block& blk = bit->second;
        std::vector<uint32_t> b(blk.row_orbit.size(), 0);
        for (const auto& [rep, v] : entries) {
            auto rit = blk.row_of.find(rep);
            if (rit == blk.row_of.end()) {
                res.residual = true;
                res.detail = "orbit outside the span at weight " + std::to_string(key.first);
                return res;
            }
            b[size_t(rit->second)] = v;
        }
        size_t n = blk.cols.size();
        std::vector<uint32_t> x(n, 0);
        for (size_t r = 0; r < n; ++r) {
            uint64_t acc = 0;
            for (size_t c = 0; c < n; ++c)
                acc += uint64_t(blk.inv[r * n + c]) * b[size_t(blk.sel[c])];
            x[r] = static_cast<uint32_t>(acc % prime_);
        }
        // Verify on all rows of the block.
        std::vector<uint64_t> acc(blk.row_orbit.size(), 0);
        for (size_t c = 0; c < n; ++c) {
            if (!x[c]) continue;
            for (uint32_t t = blk.col_start[c]; t < blk.col_start[c + 1]; ++t)
                acc[blk.ent_row[t]] += uint64_t(x[c]) * blk.ent_val[t];
        }
        for (size_t r = 0; r < acc.size(); ++r) {
            if (acc[r] % prime_ != b[r]) {
                res.residual = true;
                res.detail = "inconsistent block at weight " + std::to_string(key.first) +
                             ", q'-degree " + std::to_string(key.second);
                return res;
            }
        }
        for (size_t c = 0; c < n; ++c)
            if (x[c]) ghat[blk.cols[c]] = x[c];
    }

    // Convert from (s, l) to (s, s') coordinates: l_i = s'_i - Gamma_i(s).
    std::map<SKey, SPoly> lpow_cache;
    for (const auto& [eg, coeff] : ghat) {
        SKey gpart{};
        for (int i = 0; i < kMaxPairs; ++i) gpart[size_t(kMaxPairs + i)] = eg[size_t(kMaxPairs + i)];
        auto it = lpow_cache.find(gpart);
        if (it == lpow_cache.end()) {
            SPoly prod;
            SKey one{};
            prod.terms[one] = 1;
            for (int i = 1; i <= p_; ++i) {
                int e = gpart[size_t(kMaxPairs + i - 1)];
                if (!e) continue;
                SPoly base = spoly_scale(gammas_[size_t(i)], prime_ - 1, prime_);
                SKey sp{};
                sp[size_t(kMaxPairs + i - 1)] = 1;
                base.add(sp, 1, prime_);
                for (int t = 0; t < e; ++t) prod = spoly_mul(prod, base, prime_);
            }
            it = lpow_cache.emplace(gpart, std::move(prod)).first;
        }
        for (const auto& [k, v] : it->second.terms) {
            SKey k2 = k;
            for (int i = 0; i < kMaxPairs; ++i)
                k2[size_t(i)] = static_cast<uint8_t>(k2[size_t(i)] + eg[size_t(i)]);
            res.G.add(k2, fpmod::mul(v, coeff, prime_), prime_);
        }
    }
    return res;
}

// Shared per-(p, W, ordering) solver cache.
inline const SymSolver& solver_cache(uint64_t p, int64_t W, bool reverse_cols = false) {
    static std::map<std::tuple<uint64_t, int64_t, bool>, std::unique_ptr<SymSolver>> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_tuple(p, W, reverse_cols);
    auto it = cache.find(key);
    if (it == cache.end())
        it = cache.emplace(key, std::make_unique<SymSolver>(p, W, reverse_cols)).first;
    return *it->second;
}

inline SymSolveResult symmetric_solve(const MultiPoly& P, bool reverse_cols = false) {
    return solver_cache(P.p, P.wcap, reverse_cols).solve(P);
}

struct PuOracle {
    DeltaSeries1 series;
    int64_t safe_degree;
    // Certified precision (in the q-exponent of the component series) per
    // q'-power; components without any certified coefficient are absent.
    std::map<int64_t, int64_t> comp_prec;
};

// The brute-force "pU": expand, solve, substitute s = (0,..,0,q),
// s' = (0,..,0,q').
inline PuOracle pu_oracle(const DeltaSeries1& f, int64_t W) {
    MultiPoly P = sigma_p_expand(f, W);
    SymSolveResult res = symmetric_solve(P);
    require(!res.residual, "not-symmetric", "oracle solve failed: " + res.detail);
    uint64_t prime = f.prime();
    int64_t ip = static_cast<int64_t>(prime);
    int p = static_cast<int>(prime);

    PuOracle out{DeltaSeries1(prime, std::max<int64_t>(2 * ip, 8)), res.safe_degree, {}};
    for (int64_t b = 0; ip * ip * b <= res.safe_degree; ++b)
        out.comp_prec[b] = floor_div(res.safe_degree - ip * ip * b, ip) + ip * b + 1;

    std::map<int64_t, std::vector<std::pair<int64_t, uint32_t>>> comps;
    for (const auto& [k, v] : res.G.terms) {
        bool survives = true;
        for (int i = 0; i + 1 < p; ++i)
            if (k[size_t(i)] || k[size_t(kMaxPairs + i)]) survives = false;
        if (!survives) continue;
        int64_t a = k[size_t(p - 1)];
        int64_t b = k[size_t(kMaxPairs + p - 1)];
        comps[b].push_back({a + ip * b, v}); // exponent in the Psi basis
    }
    for (const auto& [b, terms] : comps) {
        int64_t prec = out.comp_prec.at(b);
        LaurentSeries s = LaurentSeries::zero(prime, prec);
        for (const auto& [e, v] : terms)
            s = s + LaurentSeries::monomial(prime, e, Fp::raw(v, prime), prec);
        out.series.set_component(b, s);
    }
    return out;
}

} // namespace deltap
