#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <tuple>
#include <string>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "hclab/density.hpp"
#include "hclab/function_spec.hpp"
#include "hclab/setsep.hpp"

namespace hclab {

// Weights w_1..w_H (stored at index n-1). Nonzero; signs allowed.
struct WeightSequence {
    std::vector<double> weights;
    int exponent = 1;  // ℓ^exponent; 0 marks c₀
    double min_abs = 0.0, max_abs = 0.0;

    static WeightSequence make(std::vector<double> weights, int exponent = 1);
    std::int64_t horizon() const { return static_cast<std::int64_t>(weights.size()); }
    double at(std::int64_t n) const { return weights.at(static_cast<std::size_t>(n - 1)); }
};

// Finitely supported sequence indexed from 0.
struct SparseVector {
    std::vector<std::pair<std::int64_t, std::complex<double>>> entries;

    static SparseVector make(std::vector<std::pair<std::int64_t, std::complex<double>>> entries);
    static SparseVector basis(std::int64_t index, std::complex<double> c = 1.0);
    std::complex<double> at(std::int64_t index) const;
    double norm(int exponent = 1) const;  // exponent 0: sup norm
};

struct PseudoShiftSpec {
    FunctionSpec f;
    WeightSequence w;
};

// (Tx)_j = w_{f(j)} x_{f(j)}, j ≥ 0.
SparseVector apply_pseudo_shift(const PseudoShiftSpec& t, const SparseVector& x);

// (B_w^n z)_j = w_{j+1}···w_{j+n} z_{j+n}, products accumulated in log-space.
SparseVector shift_power_orbit(const WeightSequence& w, const SparseVector& z, std::int64_t n);

// ---------------------------------------------------------------------------
// The explicit disjointly frequently hypercyclic pair on ℓ¹.

struct ScheduleCheck {
    int p = 0;
    std::int64_t n_p = 0;
    // Named inequality → (value compared, pass). Values are in log form where noted.
    std::vector<std::tuple<std::string, double, bool>> rows;
    bool passed = true;
};

struct ScheduleReport {
    std::vector<ScheduleCheck> per_p;
    double eq6_partial_sum = 0.0;
    bool passed = true;
};

// Smallest increasing N_p ≥ p satisfying the growth conditions for p = 1..count.
std::vector<std::int64_t> default_schedule(int count);
ScheduleReport check_schedule(const std::vector<std::int64_t>& n_schedule);

// Targets x_p = (a_0..a_{p-1}), y_p = (b_0..b_{p-1}) with 1/p ≤ |a_i|, |b_i| ≤ p.
struct TargetPair {
    std::vector<mpq_class> a, b;
};
using TargetGenerator = std::function<TargetPair(int p)>;
// Signed Calkin–Wilf enumeration clamped into [1/p, p]; b_i = a_{p-1-i}.
TargetPair default_targets(int p);

enum class SetSource { greedy, pipeline };

struct DfhcOptions {
    std::int64_t horizon = 100000;
    int count = 4;  // p = 1..count
    std::optional<std::vector<std::int64_t>> schedule;
    TargetGenerator targets = default_targets;
    SetSource source = SetSource::greedy;
};

struct DfhcConstruction {
    std::int64_t horizon = 0;
    int count = 0;
    std::vector<std::int64_t> n_schedule;      // N_p, index p-1
    std::vector<IntegerSet> a_sets;            // A_p ∩ [1, horizon] actually used
    std::vector<double> design_density;        // density the set builder aimed for
    std::vector<std::int64_t> blocks;          // n_1 < n_2 < ...
    std::vector<int> block_p;                  // p with n_k ∈ A_p
    std::vector<TargetPair> targets;           // index p-1
    std::vector<mpq_class> w, wp;              // index n-1 for n = 1..horizon
    std::vector<long double> log_w, log_wp;    // log|w_n|
    std::vector<std::pair<std::int64_t, mpq_class>> z;  // nonzero entries, sorted
    // Exact w_1···w_{n_k − 1} at each block start.
    std::vector<mpq_class> block_prefix_w, block_prefix_wp;
    ScheduleReport schedule_report;
    Certificate set_certificate;  // A_p gap conditions, re-checked by the setsep verifier
    std::string source;
    std::vector<std::string> notes;
};

DfhcConstruction build_dfhc_pair(const DfhcOptions& opts = {});

struct WsReport {
    bool ws1 = false, ws2a = false, ws2b = false, ws2c = false, ws2d = false, ws3 = false, ws4 = false;
    double ws3_worst_ratio = 0.0;     // max over n of max(|w_n|/5, (1/n)/|w_n|)
    double ws4_worst_margin = 0.0;    // min over n of (log|w_1···w_n| − n log 3)/(n log 3)
    std::int64_t blocks_checked = 0;
    std::vector<std::string> failures;
    bool passed() const { return ws1 && ws2a && ws2b && ws2c && ws2d && ws3 && ws4; }
};

// Independent re-check of WS1–WS4 over every index ≤ horizon.
WsReport verify_ws(const DfhcConstruction& c, double rel_slack = 1e-12);

// ε(p) = (3/2)·5^p p³/3^{N_p} + (3/2)·Σ_{q>p} 5^q q²/3^{N_q}, over the covered q.
long double epsilon_bound(const std::vector<std::int64_t>& n_schedule, int p);

struct OrbitDistance {
    std::int64_t n = 0;
    long double dist_w = 0, dist_wp = 0;  // ‖B_w^n z − x_p‖₁, ‖B_{w'}^n z − y_p‖₁
};

struct OrbitSeries {
    int p = 0;
    long double epsilon = 0;
    long double truncation_bound = 0;  // bound on contributions beyond the horizon
    std::vector<OrbitDistance> rows;
};

// Distances for n ∈ A (defaults to A_p). Head coordinates exact, tail in log-space.
OrbitSeries orbit_distance_series(const DfhcConstruction& c, int p,
                                  const std::optional<IntegerSet>& a = std::nullopt);

// {n ≤ horizon : both distances to (x_p, y_p) are < eps}.
IntegerSet simultaneous_visits(const DfhcConstruction& c, int p, long double eps);

nlohmann::json construction_summary_json(const DfhcConstruction& c, bool include_weights = false);
nlohmann::json ws_report_json(const WsReport& r);

}  // namespace hclab
