#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "hclab/criterion.hpp"
#include "hclab/errors.hpp"

namespace hclab {

namespace {

double interval_mass(const BoundaryFunction& F, double a, double b) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    if (!(b > a)) return 0.0;
    return GK::integrate([&](double t) { return std::norm(F(t)); }, a, b, 10, 1e-12);
}

}  // namespace

ObstructionReport obstruction_experiment(const BoundaryFunction& F, double tau, double lambda,
                                         const std::vector<int>& horizons, double match_tol) {
    if (!(tau > 0)) throw ArgumentError("τ must be positive");
    if (!(lambda > 1)) throw ArgumentError("λ must exceed 1");
    if (horizons.empty()) throw ArgumentError("at least one horizon exponent p is needed");
    ObstructionReport r;
    r.tau = tau;
    r.lambda = lambda;
    r.match_tol = match_tol;
    const int pmax = *std::max_element(horizons.begin(), horizons.end());
    if (*std::min_element(horizons.begin(), horizons.end()) < 0) throw ArgumentError("horizon exponents must be ≥ 0");
    const double Xmax = std::pow(lambda, pmax);
    if (Xmax / tau > 5e7) throw RangeError("λ^p/τ exceeds the scan budget");
    r.scanned = static_cast<std::int64_t>(std::ceil(Xmax / tau));

    std::vector<double> mass(static_cast<std::size_t>(r.scanned + 1));
    for (std::int64_t n = 0; n <= r.scanned; ++n) mass[n] = interval_mass(F, n * tau, (n + 1) * tau);
    // ∫_{nτ}^{nτ+τ} |F|² ≥ ½ up to quadrature rounding.
    for (std::int64_t n = 1; n <= r.scanned; ++n)
        if (mass[n] >= 0.5 * (1 - 1e-9)) r.returns.push_back(n);
    r.vacuous = r.returns.empty();
    if (r.vacuous) {
        r.notes.push_back("no n satisfies the return condition; the incompatibility is vacuous");
        r.growth_constant = std::numeric_limits<double>::quiet_NaN();
        r.threshold = r.sharp_threshold = std::numeric_limits<double>::quiet_NaN();
    } else {
        for (std::size_t k = 1; k <= r.returns.size(); ++k)
            r.growth_constant = std::max(r.growth_constant, double(r.returns[k - 1]) / double(k));
        r.threshold = 1.0 / (4 * r.growth_constant * tau);
        r.sharp_threshold = 1.0 / (2 * r.growth_constant * tau);
    }

    r.consistent = !r.vacuous;
    r.matches = !r.vacuous;
    for (int p : horizons) {
        ObstructionRow row;
        row.p = p;
        row.length = std::pow(lambda, p);
        const std::int64_t full = static_cast<std::int64_t>(std::floor(row.length / tau));
        for (std::int64_t n = 0; n < full; ++n) row.integral += mass[n];
        row.integral += interval_mass(F, full * tau, row.length);
        row.eps_critical = row.integral / row.length;
        for (std::int64_t n : r.returns)
            if ((n + 1) * tau <= row.length) ++row.returns_inside;
        row.eps_count = 0.5 * row.returns_inside / row.length;
        if (!r.vacuous) {
            row.packed = static_cast<std::int64_t>(std::floor(row.length / (2 * r.growth_constant * tau)));
            row.ratio = row.eps_critical / r.threshold;
            if (row.integral < 0.5 * row.packed * (1 - 1e-9)) r.consistent = false;
            if (!(std::fabs(row.ratio - 1) <= match_tol)) r.matches = false;
        }
        r.rows.push_back(row);
    }
    if (!r.vacuous) {
        r.notes.push_back("counting bound: ∫₀^{λᵖ}|F|² ≥ ½·⌊λᵖ/(2Cτ)⌋, so ε < 1/(4Cτ) is incompatible");
        r.notes.push_back("every return interval inside [0, λᵖ] carries mass ½, and there are about λᵖ/(Cτ) of them; "
                          "the measured ratio to 1/(4Cτ) is therefore at least about 2");
    }
    return r;
}

ObstructionReport obstruction_experiment(const HalfPlaneFunction& F, double tau, double lambda,
                                         const std::vector<int>& horizons, double match_tol) {
    return obstruction_experiment([&F](double t) { return F(cplx(0.0, t)); }, tau, lambda, horizons, match_tol);
}

BoundaryFunction bump_train(double tau, std::function<bool(std::int64_t)> in_return_set, double mass) {
    if (!(tau > 0)) throw ArgumentError("τ must be positive");
    if (!(mass >= 0)) throw ArgumentError("bump mass must be nonnegative");
    // ∫₀¹ (30x²(1−x)²)² dx = 10/7
    const double c = std::sqrt(mass * 7.0 / (10.0 * tau));
    return [tau, c, in = std::move(in_return_set)](double t) -> cplx {
        if (t < 0) return 0.0;
        const double u = t / tau;
        const auto n = static_cast<std::int64_t>(std::floor(u));
        if (!in(n)) return 0.0;
        const double x = u - double(n);
        return c * 30 * x * x * (1 - x) * (1 - x);
    };
}

nlohmann::json obstruction_json(const ObstructionReport& r) {
    auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& w : r.rows)
        rows.push_back({{"p", w.p},
                        {"length", w.length},
                        {"integral", w.integral},
                        {"eps_critical", w.eps_critical},
                        {"packed", w.packed},
                        {"returns_inside", w.returns_inside},
                        {"eps_count", w.eps_count},
                        {"ratio", num(w.ratio)}});
    const std::size_t shown = std::min<std::size_t>(r.returns.size(), 64);
    return {{"tau", r.tau},
            {"lambda", r.lambda},
            {"scanned", r.scanned},
            {"return_count", r.returns.size()},
            {"returns_head", std::vector<std::int64_t>(r.returns.begin(), r.returns.begin() + shown)},
            {"growth_constant", num(r.growth_constant)},
            {"threshold", num(r.threshold)},
            {"sharp_threshold", num(r.sharp_threshold)},
            {"vacuous", r.vacuous},
            {"consistent", r.consistent},
            {"matches", r.matches},
            {"match_tol", r.match_tol},
            {"rows", rows},
            {"notes", r.notes}};
}

}  // namespace hclab
