#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <gmpxx.h>

namespace hclab {

// Finite, strictly increasing subset of [1, horizon].
class IntegerSet {
public:
    IntegerSet() = default;
    // Validates ordering and range; throws ArgumentError otherwise.
    IntegerSet(std::vector<std::int64_t> elements, std::int64_t horizon);

    static IntegerSet from_predicate(std::int64_t horizon,
                                     const std::function<bool(std::int64_t)>& pred);
    static IntegerSet interval(std::int64_t lo, std::int64_t hi, std::int64_t horizon);
    // {n : n ≡ residue mod modulus} ∩ [max(1, from), horizon]
    static IntegerSet residue_class(std::int64_t residue, std::int64_t modulus,
                                    std::int64_t horizon, std::int64_t from = 1);

    const std::vector<std::int64_t>& elements() const { return elements_; }
    std::int64_t horizon() const { return horizon_; }
    std::size_t size() const { return elements_.size(); }
    bool empty() const { return elements_.empty(); }

    bool contains(std::int64_t n) const;
    // |A ∩ [1, n]|
    std::int64_t count_upto(std::int64_t n) const;
    IntegerSet restricted_from(std::int64_t lo) const;
    IntegerSet intersect(const IntegerSet& other) const;
    bool subset_of(const IntegerSet& other) const;

    std::string to_text() const;
    static IntegerSet from_text(const std::string& text, std::int64_t horizon);
    std::string to_json() const;
    static IntegerSet from_json(const std::string& text, std::int64_t horizon);

    bool operator==(const IntegerSet&) const = default;

private:
    std::vector<std::int64_t> elements_;
    std::int64_t horizon_ = 1;
};

struct DensityReport {
    std::int64_t horizon = 0;
    std::vector<std::pair<std::int64_t, mpq_class>> checkpoint_densities;
    double lower_estimate = 0.0;
    double upper_estimate = 0.0;
    std::optional<double> banach_estimate;
};

mpq_class prefix_density(const IntegerSet& a, std::int64_t n);

// 200 evenly spaced checkpoints ending at the horizon.
std::vector<std::int64_t> default_checkpoints(std::int64_t horizon, int count = 200);

// Lower/upper estimates range over checkpoints N > burn_in (default horizon/100).
// When no checkpoint passes the burn-in, the largest checkpoint is used alone.
DensityReport density_report(const IntegerSet& a, const std::vector<std::int64_t>& checkpoints,
                             std::optional<std::int64_t> burn_in = std::nullopt,
                             std::optional<std::int64_t> banach_window = std::nullopt);

double banach_density_estimate(const IntegerSet& a, std::int64_t window);

std::string density_report_json(const DensityReport& r);

}  // namespace hclab
