#pragma once

#include <string>
#include <vector>

#include "hclab/mobius.hpp"

namespace hclab {

// ρ_{ℂ₀}; +∞ when either point is not in the open half-plane.
double hyperbolic_distance(cplx w1, cplx w2);
// ρ_𝔻 via the Cayley pullback.
double hyperbolic_distance_disc(cplx z1, cplx z2);

enum class Regime { parabolic, hyperbolic };

struct AsymptoticsOptions {
    std::vector<cplx> probes{cplx(1.0, 0.0)};
    long n_max = 10000;
    // Regression on (n, log n, 1, log n/n, 1/n) uses n ≥ fit_from.
    long fit_from = 10;
    // Keep the report instead of throwing RegimeError on unbounded residuals.
    bool allow_divergent = false;
};

struct ResidualSeries {
    cplx probe;
    std::vector<std::pair<long, cplx>> rows;
    double first_half_max = 0.0;
    double second_half_max = 0.0;
    bool bounded = false;
};

struct OrbitAsymptotics {
    Regime regime = Regime::parabolic;
    // Analytic values from φ″(1), φ‴(1) or the multiplier; absent when unavailable.
    bool has_analytic = false;
    cplx a, b;
    double lambda = 0.0;
    // Least-squares fit pooled over probes.
    cplx a_fit, b_fit;
    std::vector<ResidualSeries> residuals;
    bool bounded = false;
};

// Parabolic: a = φ″(1), b = (φ″(1)² − 2φ‴(1)/3)/φ″(1) for the disc model of ψ.
OrbitAsymptotics orbit_asymptotics(const HalfPlaneMap& psi, Regime regime, const AsymptoticsOptions& opts = {});
nlohmann::json asymptotics_to_json(const OrbitAsymptotics& r, bool include_rows = false);

struct ValironRow {
    int n = 0;
    long double log_value = 0;  // log ψ₂ⁿ(1)
    long double q = 0;          // ψ₂ⁿ(1)/2ⁿ
};

struct ValironReport {
    std::vector<ValironRow> rows;
    bool increasing = false;
};

ValironReport valiron_iterates(int n_max);
nlohmann::json valiron_to_json(const ValironReport& r);

struct SeparationProfile {
    int n_max = 0;
    // table[m][n] = ρ_𝔻(φ₁ᵐ(0), φ₂ⁿ(0)); NaN marks entries outside the numerical range.
    std::vector<std::vector<double>> table;
    // tail_min[N] = min over m, n ≥ N.
    std::vector<double> tail_min;
    bool tail_min_nondecreasing = false;
    std::string label = "evidence";
};

// Orbits of 0 are tracked in the half-plane as orbits of 1.
SeparationProfile orbit_separation_profile(const HalfPlaneMap& psi1, const HalfPlaneMap& psi2, int n_max);
nlohmann::json separation_to_json(const SeparationProfile& p, bool include_table = false);

struct LemmaParams {
    // The map under test; given as a half-plane map whose disc model has its Denjoy–Wolff point at 1.
    HalfPlaneMap map = HalfPlaneMap::dilation(2.0, 0.0);
    std::vector<double> deltas{0.1, 0.3};
    int index_min = 1;  // l, k or n
    int index_max = 30;
    double delta0 = 0.35;  // coh2hypdifferent1
    int xi_count = 48;     // coh2hypdifferent1
    double eta = 0.1;      // separedhyperbolic
    double radius = 0.5;   // separedhyperbolic: K = closed disc of this radius
    double theta = 0.3;    // koebehyperbolic
    std::vector<double> x_grid;  // koebehyperbolic; geometric 1..1e6 when empty
    int boundary_samples = 256;
};

struct CheckRow {
    std::vector<double> params;  // lemma-specific, named in CheckReport::param_names
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
};

struct CheckReport {
    std::string lemma_id;
    std::vector<std::string> param_names;
    std::vector<CheckRow> rows;
    double constant = 0.0;  // smallest C over the whole grid
    double constant_first_half = 0.0;
    double constant_second_half = 0.0;
    double stability_ratio = 0.0;  // second half / first half
    bool stable = false;
    bool passed = false;
    std::vector<std::string> notes;
    // Lemma-specific scalars (C₁, x₀, N, …).
    nlohmann::json extra = nlohmann::json::object();
};

const std::vector<std::string>& lemma_ids();
CheckReport geometric_lemma_check(const std::string& lemma_id, const LemmaParams& params);
nlohmann::json check_report_json(const CheckReport& r, bool include_rows = true);
std::string check_report_csv(const CheckReport& r);

// Exact tools shared by the lemma checks.
struct Circle {
    cplx center;
    double radius = 0.0;
};

// sup over θ ∈ [t0, t1] of |M(c + r e^{iθ}) − q|; +∞ if the pole lies on the arc.
double max_distance_on_arc(const MobiusMap& m, const Circle& circle, double t0, double t1, cplx q);
// Angular intervals of `a` lying inside (or outside) the closed disc bounded by `b`.
std::vector<std::pair<double, double>> arcs_relative_to(const Circle& a, const Circle& b, bool inside);
// m_inv([t1, t2]) = (arctan t2 − arctan t1)/π, accurate for far intervals.
double minv_interval(double t1, double t2);

}  // namespace hclab
