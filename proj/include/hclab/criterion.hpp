#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <gmpxx.h>

#include "hclab/density.hpp"
#include "hclab/hardy.hpp"
#include "hclab/mobius.hpp"
#include "hclab/setsep.hpp"
#include "hclab/shifts.hpp"

namespace hclab {

// ---------------------------------------------------------------------------
// Return-time sequences

enum class ReturnKind { all_integers, block_union, explicit_list };
std::string to_string(ReturnKind k);
ReturnKind return_kind_from_string(const std::string& s);

struct ReturnSpec {
    ReturnKind kind = ReturnKind::all_integers;
    double omega = 3.5;  // block_union: ℕ ∩ ⋃_p (ωᵖ, sωᵖ)
    double s = 1.5;
    std::vector<std::int64_t> elements;  // explicit_list

    static ReturnSpec all_integers() { return {}; }
    static ReturnSpec block_union(double omega, double s) { return {ReturnKind::block_union, omega, s, {}}; }
    static ReturnSpec explicit_list(std::vector<std::int64_t> e) {
        return {ReturnKind::explicit_list, 0.0, 0.0, std::move(e)};
    }
    nlohmann::json to_json() const;
    static ReturnSpec from_json(const nlohmann::json& j);
};

struct ReturnSequence {
    ReturnSpec spec;
    std::optional<double> ratio;  // r attached by the operator pair
    std::int64_t horizon = 0;
    std::vector<std::int64_t> n;  // n_0 < n_1 < … ≤ horizon
    // block_union: integer range [lo, hi] of block p (empty when lo > hi), p = 0, 1, …
    std::vector<std::pair<std::int64_t, std::int64_t>> blocks;
    // n_k ≤ C·k for k ≥ 1, C = max n_k/k over the materialized prefix, attained at k = growth_argmax.
    double growth_constant = 0.0;
    std::int64_t growth_argmax = 0;
    DensityReport density;

    std::size_t size() const { return n.size(); }
    std::int64_t operator[](std::size_t k) const { return n.at(k); }
    // Nearest elements of the full (unbounded) sequence; nullopt when none exists.
    std::optional<std::int64_t> prev_at_most(std::int64_t x) const;
    std::optional<std::int64_t> next_at_least(std::int64_t x) const;
    // Block index of an element, −1 outside block_union.
    int block_of(std::int64_t m) const;
};

// Throws ArgumentError naming the violated inequality ("ω > 1", "s > 1", "r·s < ω", "r − s > 0").
ReturnSequence make_return_sequence(const ReturnSpec& spec, std::optional<double> ratio,
                                    std::int64_t horizon);

struct GapStatistics {
    // p0(k) = r·n_k − max{n_j ≤ r·n_k}, p1(k) = min{n_j ≥ r·n_k} − r·n_k.
    std::vector<double> p0, p1;
    // Growth floors (r − s)ωᵖ and (ω − rs)ωᵖ for n_k in block p.
    std::vector<double> floor0, floor1;
    std::vector<int> block;
    bool floors_hold = false;
    bool p0_nondecreasing = false;
    bool p1_nondecreasing = false;  // literal; p1 shrinks inside a block
    // min over k' ≥ k of p1, and the per-block minima of p1.
    std::vector<double> p1_envelope;
    std::vector<double> p1_block_min;
    bool p1_envelope_nondecreasing = false;
    bool p1_block_min_increasing = false;
};

// Requires a block_union sequence with ratio and at least k_count materialized elements.
GapStatistics gap_statistics(const ReturnSequence& seq, std::size_t k_count);

// ---------------------------------------------------------------------------
// Dense targets and S-map families

// scale · Π (z − roots_i), evaluated in product form.
struct RootPolynomial {
    cplx scale{1.0};
    std::vector<cplx> roots;

    cplx operator()(cplx z) const;
    DiscFunction expanded() const;
    bool is_zero() const { return scale == cplx(0.0); }
    nlohmann::json to_json() const;
    static RootPolynomial from_json(const nlohmann::json& j);
};

// y = (F, G) with F = P₁∘𝒞⁻¹, G = P₂∘𝒞⁻¹ (half-plane pairs), y = (f, g) (composition pair),
// or the target pair (x_p, y_p) of the shift construction.
struct DenseElement {
    std::array<RootPolynomial, 2> components;
    std::array<std::optional<DiscFunction>, 2> disc;  // composition pair
    int target = 1;                                   // shift pair: p

    static DenseElement zero();
    nlohmann::json to_json() const;
    static DenseElement from_json(const nlohmann::json& j);
};

// ψ_j(w) = λ_j(w − b_j) + b_j with λ₁ = λ, λ₂ = μ.
struct HyperbolicPair {
    double lambda = 2.0, mu = 4.0;
    cplx b1{-0.5}, b2{-0.25};
};
// ψ_j(w) = w + iτ_j.
struct ParabolicPair {
    double tau1 = 1.0, tau2 = -1.0;
};
// Disc symbols; iterates in closed form.
struct CompositionPair {
    MobiusMap phi1, phi2;
};
// Backward shifts B_w, B_{w′} of the explicit construction.
struct ShiftPair {
    std::shared_ptr<const DfhcConstruction> construction;
};

using SMapFamily = std::variant<HyperbolicPair, ParabolicPair, CompositionPair, ShiftPair>;

std::string family_kind(const SMapFamily& f);
// r with μ = λ^r or τ_big = r·τ_small (same sign); nullopt otherwise. Swaps so r ≥ 1.
std::optional<double> family_ratio(const SMapFamily& f);
// First `count` (≤ 4) elements of a fixed rational enumeration of the dense family.
std::vector<DenseElement> dense_targets(const SMapFamily& f, int count);
// PreconditionError naming the missing zero or the inconsistent field.
void validate_dense(const SMapFamily& f, const DenseElement& y);

// S_n y as a boundary function: w ↦ value for half-plane pairs, z ↦ value for the composition pair.
std::function<cplx(cplx)> smap(const SMapFamily& f, const DenseElement& y, std::int64_t n);
// Shift pair: the block of z at n ∈ A_p, exact.
std::vector<std::pair<std::int64_t, mpq_class>> shift_smap(const ShiftPair& f, int p, std::int64_t n);

// ---------------------------------------------------------------------------
// Conditions C1–C4

struct Truncation {
    std::int64_t k_max = 200;
    std::int64_t l_max = 60;
    int window = 10;
    // Geometric sampling of k, l and window starts ({0, 1, 2, 4, …, max}); termwise branches skipped.
    bool geometric = false;
};

struct CriterionConfig {
    SMapFamily family = HyperbolicPair{};
    ReturnSpec sequence = ReturnSpec::block_union(3.5, 1.5);
    std::vector<DenseElement> targets;  // empty: dense_targets(family, 1)
    Truncation truncation;
    double tolerance = 1e-3;
    std::int64_t horizon = 100000;  // sequence materialization and assembly
    QuadratureGrid grid{4096, Substitution::circle};  // composition pair
    nlohmann::json family_json;  // source description for reports

    nlohmann::json to_json() const;
    // Unknown keys throw ConfigError naming the JSON pointer.
    static CriterionConfig from_json(const nlohmann::json& j);
};

void validate_config(const CriterionConfig& c);

struct ConditionTable {
    std::string condition;  // C1 … C4
    int op = 0;             // 1, 2; 0 for C1
    std::string component;  // F, G, or "" for whole-element tables
    std::string branch;     // termwise_l1, per_k_c0, window, limit, exact, with_tail
    std::string index_name;
    std::vector<std::int64_t> index;
    std::vector<double> value;
    std::int64_t verdict_from = 0;
    bool below_tolerance = false;
    bool nonincreasing = false;
};

struct ConditionVerdict {
    std::string condition;
    int op = 0;
    bool passed = false;
    std::string branch;  // branch that fired, per component joined by '+'
};

struct TailReport {
    std::string family;
    int target = 1;
    double tolerance = 0.0;
    std::vector<ConditionTable> tables;
    std::vector<ConditionVerdict> verdicts;
    bool passed = false;
    std::vector<std::string> notes;

    const ConditionTable* find(const std::string& condition, int op, const std::string& branch,
                               const std::string& component = "") const;
    const ConditionVerdict* verdict(const std::string& condition, int op) const;
};

// C4 targets are y_j = components of y. Quadrature failures are rethrown with the (k, l) location.
TailReport check_conditions(const CriterionConfig& config, const DenseElement& y);
nlohmann::json tail_report_json(const TailReport& r);
std::string tail_report_csv(const TailReport& r);

// ---------------------------------------------------------------------------
// Candidate assembly and visits

struct CandidateProvenance {
    std::vector<double> epsilon;            // ε_p
    std::vector<std::int64_t> thresholds;   // N_p
    std::vector<std::vector<std::int64_t>> a_sets;  // A_p ∩ [1, horizon]
    std::vector<std::string> notes;
    double tail_mass_estimate = 0.0;
    Certificate certificate;
};

struct CandidateTerm {
    int p = 1;
    std::int64_t n = 0;
};

struct Candidate {
    std::string family;
    std::vector<CandidateTerm> terms;
    std::vector<DenseElement> targets;  // y(p), index p − 1
    // Shift pair: exact entries, sorted.
    std::vector<std::pair<std::int64_t, mpq_class>> entries;
    double norm = 0.0;        // ℓ¹ for shifts, H² otherwise
    double norm_bound = 0.0;  // Σ over terms of ‖S_n y(p)‖
    CandidateProvenance provenance;
};

// `a_family` carries B_p ⊂ ℕ (k-indices); A_p = {n_k : k ∈ B_p}. The shift pair uses its own A_p.
Candidate assemble_candidate(const CriterionConfig& config, const std::vector<DenseElement>& targets,
                             const std::optional<SeparatedFamily>& a_family);
// Boundary values of the candidate (w ↦ x(w), or z ↦ x(z)).
std::function<cplx(cplx)> candidate_function(const CriterionConfig& config, const Candidate& x);
nlohmann::json candidate_json(const Candidate& x);

struct VisitReport {
    int target = 1;
    double epsilon = 0.0;
    std::int64_t horizon = 0;
    IntegerSet visits;
    DensityReport density;
    std::vector<std::pair<std::int64_t, std::string>> failures;  // per-n evaluation failures
    std::vector<std::string> notes;
};

VisitReport visit_density_diagnostic(const CriterionConfig& config, const Candidate& x,
                                     const DenseElement& target, double epsilon, std::int64_t horizon);
nlohmann::json visit_report_json(const VisitReport& r);

// ---------------------------------------------------------------------------
// Obstruction for translations

using BoundaryFunction = std::function<cplx(double)>;  // t ↦ F(it)

struct ObstructionRow {
    int p = 0;
    double length = 0.0;              // λᵖ
    double integral = 0.0;            // ∫₀^{λᵖ} |F(it)|² dt
    double eps_critical = 0.0;        // integral / λᵖ
    std::int64_t packed = 0;          // ⌊λᵖ/(2Cτ)⌋
    std::int64_t returns_inside = 0;  // #{k : n_kτ + τ ≤ λᵖ}
    double eps_count = 0.0;           // ½·returns_inside/λᵖ
    double ratio = 0.0;               // eps_critical / threshold
};

struct ObstructionReport {
    double tau = 0.0, lambda = 0.0;
    std::int64_t scanned = 0;  // n ≤ scanned were tested for returns
    std::vector<std::int64_t> returns;
    double growth_constant = 0.0;  // C = max n_k/k
    double threshold = 0.0;        // 1/(4Cτ)
    double sharp_threshold = 0.0;  // 1/(2Cτ)
    std::vector<ObstructionRow> rows;
    bool vacuous = false;
    bool consistent = false;  // eps_critical ≥ threshold on every row
    bool matches = false;     // |ratio − 1| ≤ match_tol on every row
    double match_tol = 0.2;
    std::vector<std::string> notes;
};

ObstructionReport obstruction_experiment(const BoundaryFunction& F, double tau, double lambda,
                                         const std::vector<int>& horizons, double match_tol = 0.2);
ObstructionReport obstruction_experiment(const HalfPlaneFunction& F, double tau, double lambda,
                                         const std::vector<int>& horizons, double match_tol = 0.2);
// Σ_{n ∈ R} c·b((t − nτ)/τ), b(x) = 30x²(1−x)² on [0,1]; c chosen so each bump carries `mass`.
BoundaryFunction bump_train(double tau, std::function<bool(std::int64_t)> in_return_set, double mass = 0.5);
nlohmann::json obstruction_json(const ObstructionReport& r);

}  // namespace hclab
