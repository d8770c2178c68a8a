#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "hclab/density.hpp"
#include "hclab/function_spec.hpp"

namespace hclab {

struct SeparationRequest {
    std::vector<FunctionSpec> functions;
    std::vector<IntegerSet> base_sets;     // empty → default residue classes
    std::vector<std::int64_t> thresholds;  // N_k, one per set
    int count = 1;
    std::int64_t horizon = 100000;
};

// Which inequality a family certifies.
//  theorem:   n ∈ A_k, m ∈ A_l, n ≠ m  ⇒ |F(n) − G(m)| ≥ N_k + N_l for F, G ∈ functions
//  corollary: (i,n) ≠ (j,m)           ⇒ |φ_i(n) − φ_j(m)| ≥ N_k + N_l
//  wpr:       m ∈ A_j, n ∈ A_l, m ≠ n  ⇒ f_s^m({1..j}) ∩ f_t^n({1..l}) = ∅
enum class SeparationMode { theorem, corollary, wpr };
std::string to_string(SeparationMode m);
SeparationMode separation_mode_from_string(const std::string& s);

struct Violation {
    int set_a = 0, fn_a = 0;
    std::int64_t n = 0;
    int set_b = 0, fn_b = 0;
    std::int64_t m = 0;
    double gap = 0.0;       // |F(n) − G(m)| (0 for a wpr collision)
    double required = 0.0;  // N_k + N_l (1 for wpr)
};

struct Certificate {
    SeparationMode mode = SeparationMode::theorem;
    bool passed = false;
    bool subset_ok = false;
    bool thresholds_ok = false;
    bool disjoint_ok = false;
    bool separation_ok = false;
    std::int64_t values_checked = 0;
    std::int64_t pairs_compared = 0;
    std::int64_t unverifiable = 0;  // values beyond the representable range
    double min_slack = 0.0;         // min over compared pairs of gap − required
    std::vector<Violation> violations;  // first few, for reporting
    std::int64_t violation_count = 0;
    std::vector<std::string> facts;
};

struct SeparatedFamily {
    SeparationMode mode = SeparationMode::theorem;
    std::int64_t horizon = 0;
    std::vector<FunctionSpec> functions;     // 𝓕, (φ1, φ2), or the wpr maps f_s
    std::vector<std::int64_t> thresholds;    // N_k
    std::vector<std::int64_t> radii;         // shift radius used per index in the pipeline
    std::vector<IntegerSet> base_sets;       // B_k as supplied
    std::vector<IntegerSet> sets;            // A_k
    std::vector<double> floors;              // finite-horizon density floor (asserted)
    std::vector<double> asymptotic_floors;   // same budget chain without rounding losses
    std::vector<double> nominal_floors;      // design / (4 |functions| count)
    std::vector<DensityReport> density_reports;
    // log_linear families: the original complex pairs (a_i, b_i); the
    // certificate checks |a_i n + b_i log n − a_j m − b_j log m| directly.
    std::vector<std::pair<std::complex<double>, std::complex<double>>> complex_pairs;
    int projection = 0;  // 0: real parts drive the construction, 1: imaginary parts
    std::vector<std::int64_t> entry_thresholds;  // M_k where the construction needed them
    std::vector<std::string> notes;
    Certificate certificate;
};

// Index family 𝓔_k = {f + j : f ∈ base, |j| ≤ radius}.
struct IndexFamily {
    std::vector<FunctionSpec> base;
    std::int64_t radius = 0;
};

struct PipelineOutput {
    std::vector<IntegerSet> sets;
    std::vector<double> floors;             // accounts for the < 1 element lost per thinning pass
    std::vector<double> asymptotic_floors;
    std::vector<std::int64_t> thinning_factors;  // ∏ K applied to each index
};

// Inductive thinning + diagonal extraction producing A_j ⊆ B_j with
// F(m) ≠ G(n) for F ∈ 𝓔_j, G ∈ 𝓔_l, m ∈ A_j, n ∈ A_l, m ≠ n.
// Real-valued functions are compared through floor keys, so the output
// satisfies |key_f(m) − key_g(n)| ≥ r_j + r_l + 1.
PipelineOutput separation_pipeline(const std::vector<IndexFamily>& families,
                                   const std::vector<IntegerSet>& base_sets);

// Keeps {b : h(b) ∉ ℕ} plus every K-th b with h(b) ∈ ℕ, K = ⌈2/delta⌉.
IntegerSet thin_image_subset(const IntegerSet& b, const FunctionSpec& h, double delta);

// Greedy smallest-first extraction with n ≠ f(m) for distinct chosen n, m.
IntegerSet collision_free_subset(const IntegerSet& a, const std::vector<FunctionSpec>& fs);

// B_k = {n ≡ 2^{k-1} mod 2^k} ∩ [from_k, horizon].
std::vector<IntegerSet> default_base_sets(int count, std::int64_t horizon,
                                          const std::vector<std::int64_t>& from);

SeparatedFamily separated_under_functions(const SeparationRequest& req);

SeparatedFamily gap_separated_families(const FunctionSpec& phi1, const FunctionSpec& phi2,
                                       const std::vector<std::int64_t>& thresholds,
                                       const std::vector<IntegerSet>& base_sets,
                                       std::int64_t horizon);

SeparatedFamily log_linear_families(
    const std::vector<std::pair<std::complex<double>, std::complex<double>>>& pairs,
    const std::vector<std::int64_t>& thresholds, std::int64_t horizon,
    const std::vector<IntegerSet>& base_sets = {});

// fs: integer-affine maps f_s (or iterated_map specs, whose map is used).
SeparatedFamily wpr_families(const std::vector<FunctionSpec>& fs, int levels,
                             const std::vector<IntegerSet>& base_sets, std::int64_t horizon);

// Independent exhaustive re-check; shares no evaluation code with the constructors.
Certificate verify_family(const SeparatedFamily& family, std::size_t max_violations = 16);

nlohmann::json family_to_json(const SeparatedFamily& family);
SeparatedFamily family_from_json(const nlohmann::json& j);
nlohmann::json certificate_to_json(const Certificate& c);

}  // namespace hclab
