#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hclab/criterion.hpp"
#include "hclab/errors.hpp"

namespace hclab::detail {

using ld = long double;
using cld = std::complex<ld>;

// Word in the symbols ψ₁, ψ₂ (or φ₁, φ₂), outermost first. Neighbouring steps carry distinct
// symbols and nonzero exponents, so the identity is the empty word.
struct Chain {
    std::vector<std::pair<int, std::int64_t>> steps;

    // Appends ψ_sym^e on the inside: H∘W becomes H∘W∘ψ_sym^e.
    Chain& then(int sym, std::int64_t e);
    bool empty() const { return steps.empty(); }
    auto operator<=>(const Chain&) const = default;
};

struct Term {
    int poly = 0;  // index into the engine's polynomial table
    Chain chain;
    ld weight = 1;
};

// Merges terms with equal (poly, chain); drops zero weights and zero polynomials.
std::vector<Term> combine(const std::vector<Term>& terms, const std::vector<bool>& zero_poly);

// Norms of finite sums Σ weight·H_poly∘chain for the half-plane and disc families.
class TermEngine {
public:
    explicit TermEngine(const CriterionConfig& config);

    // Returns the table index of a polynomial, reusing an equal one.
    int add(const DenseElement& y, int component);
    bool is_zero(int poly) const { return zero_[poly]; }

    double norm(const std::vector<Term>& terms) const;
    // Cached ‖H_poly∘chain‖.
    double single_norm(int poly, const Chain& chain) const;
    cplx value(const std::vector<Term>& terms, cplx point) const;
    bool disc() const { return disc_; }

private:
    struct Piece {
        cld coef;
        std::vector<cld> zeros;
        cld pole;
        cld scale;  // linear part A of the chain
        int ones = 0;
        cld operator()(cld w) const;
    };
    struct Symbol {
        bool dilation = true;
        cld center;
        ld log_rate = 0;
        ld tau = 0;
    };

    bool disc_ = false;
    std::array<Symbol, 2> sym_{};
    std::array<MobiusMap, 2> phi_{};
    std::vector<cplx> focus_points_;
    QuadratureGrid grid_;
    std::vector<RootPolynomial> roots_;
    std::vector<std::optional<DiscFunction>> discs_;
    std::vector<bool> zero_;
    mutable std::map<std::pair<int, Chain>, double> cache_;

    cld pull(const Chain& c, cld v) const;
    ld log_scale(const Chain& c) const;
    Piece piece(const Term& t) const;
    MobiusMap map(const Chain& c) const;
    double half_plane_norm2(const std::vector<Term>& terms) const;
    double disc_norm2(const std::vector<Term>& terms) const;

    friend std::vector<Term> combine_terms(const TermEngine&, const std::vector<Term>&);
};

std::vector<Term> combine_terms(const TermEngine& e, const std::vector<Term>& terms);

// Rethrows a library error with a location suffix, keeping its kind.
[[noreturn]] void rethrow_at(const Error& e, const std::string& where);

// {0, 1, 2, 4, …} ∪ {max} capped at max; all of 0..max when dense.
std::vector<std::int64_t> index_grid(std::int64_t max, bool geometric);

// log|q| for a nonzero rational.
long double log_abs(const mpq_class& q);

// ℓ¹ orbit quantities of a sparse vector under B_w, B_{w′} of a construction, in log-space.
struct ShiftOrbit {
    const DfhcConstruction& c;
    const std::vector<std::pair<std::int64_t, mpq_class>>& z;  // sorted entries of the vector
    std::vector<long double> S[2];  // S[j][i] = Σ_{t ≤ i} log|w_t|
    std::vector<int> neg[2];        // count of negative weights among w_1..w_i
    std::vector<long double> logz;  // per entry of z

    ShiftOrbit(const DfhcConstruction& con, const std::vector<std::pair<std::int64_t, mpq_class>>& entries)
        : c(con), z(entries) {
        const std::size_t H = static_cast<std::size_t>(c.horizon);
        for (int j = 0; j < 2; ++j) {
            const auto& lw = j == 0 ? c.log_w : c.log_wp;
            const auto& w = j == 0 ? c.w : c.wp;
            S[j].assign(H + 1, 0);
            neg[j].assign(H + 1, 0);
            for (std::size_t i = 1; i <= H; ++i) {
                S[j][i] = S[j][i - 1] + lw[i - 1];
                neg[j][i] = neg[j][i - 1] + (sgn(w[i - 1]) < 0 ? 1 : 0);
            }
        }
        for (const auto& e : z) logz.push_back(log_abs(e.second));
    }

    std::size_t first_entry(std::int64_t i) const {
        return static_cast<std::size_t>(
            std::lower_bound(z.begin(), z.end(), i, [](const auto& e, std::int64_t v) { return e.first < v; }) -
            z.begin());
    }

    // ‖B_j^m applied to the entries of z with index in [lo, hi)‖₁
    long double shifted_norm(int j, std::int64_t m, std::int64_t lo, std::int64_t hi) const {
        long double s = 0;
        for (std::size_t e = first_entry(std::max(lo, m)); e < z.size() && z[e].first < hi; ++e) {
            const std::int64_t i = z[e].first;
            s += std::exp(S[j][i] - S[j][i - m] + logz[e]);
        }
        return s;
    }

    // Exact w_1···w_i, for i before the first block or inside the first few entries of a block.
    mpq_class prefix(int j, std::int64_t i) const {
        const auto& w = j == 0 ? c.w : c.wp;
        auto it = std::upper_bound(c.blocks.begin(), c.blocks.end(), i);
        mpq_class r = 1;
        std::int64_t from = 1;
        if (it != c.blocks.begin()) {
            const std::size_t k = static_cast<std::size_t>(it - c.blocks.begin()) - 1;
            r = (j == 0 ? c.block_prefix_w : c.block_prefix_wp)[k];
            from = c.blocks[k];
        }
        for (std::int64_t t = from; t <= i; ++t) r *= w[t - 1];
        return r;
    }

    // Σ_{t<p} |(B_j^n z)_t − target_t| in exact arithmetic.
    mpq_class exact_head(int j, std::int64_t n, int p, const std::vector<mpq_class>& target) const {
        mpq_class total = 0;
        for (int t = 0; t < p; ++t) {
            const std::size_t e = first_entry(n + t);
            mpq_class v = 0;
            if (e < z.size() && z[e].first == n + t) v = z[e].second * prefix(j, n + t) / prefix(j, t);
            total += abs(v - (t < static_cast<int>(target.size()) ? target[t] : mpq_class(0)));
        }
        return total;
    }
};

}  // namespace hclab::detail
