#include "hclab/density.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "hclab/errors.hpp"

namespace hclab {

IntegerSet::IntegerSet(std::vector<std::int64_t> elements, std::int64_t horizon)
    : elements_(std::move(elements)), horizon_(horizon) {
    if (horizon_ < 1) throw ArgumentError("horizon must be positive");
    for (std::size_t i = 0; i < elements_.size(); ++i) {
        if (elements_[i] < 1 || elements_[i] > horizon_)
            throw ArgumentError("element " + std::to_string(elements_[i]) + " outside [1, horizon]");
        if (i > 0 && elements_[i] <= elements_[i - 1])
            throw ArgumentError("elements must be strictly increasing");
    }
}

IntegerSet IntegerSet::from_predicate(std::int64_t horizon,
                                      const std::function<bool(std::int64_t)>& pred) {
    std::vector<std::int64_t> out;
    for (std::int64_t n = 1; n <= horizon; ++n)
        if (pred(n)) out.push_back(n);
    return IntegerSet(std::move(out), horizon);
}

IntegerSet IntegerSet::interval(std::int64_t lo, std::int64_t hi, std::int64_t horizon) {
    std::vector<std::int64_t> out;
    for (std::int64_t n = std::max<std::int64_t>(lo, 1); n <= std::min(hi, horizon); ++n)
        out.push_back(n);
    return IntegerSet(std::move(out), horizon);
}

IntegerSet IntegerSet::residue_class(std::int64_t residue, std::int64_t modulus,
                                     std::int64_t horizon, std::int64_t from) {
    if (modulus < 1) throw ArgumentError("modulus must be positive");
    std::int64_t start = std::max<std::int64_t>(from, 1);
    std::int64_t r = ((residue % modulus) + modulus) % modulus;
    std::int64_t first = start + ((r - start % modulus) % modulus + modulus) % modulus;
    std::vector<std::int64_t> out;
    for (std::int64_t n = first; n <= horizon; n += modulus) out.push_back(n);
    return IntegerSet(std::move(out), horizon);
}

bool IntegerSet::contains(std::int64_t n) const {
    return std::binary_search(elements_.begin(), elements_.end(), n);
}

std::int64_t IntegerSet::count_upto(std::int64_t n) const {
    return std::upper_bound(elements_.begin(), elements_.end(), n) - elements_.begin();
}

IntegerSet IntegerSet::restricted_from(std::int64_t lo) const {
    auto it = std::lower_bound(elements_.begin(), elements_.end(), lo);
    return IntegerSet(std::vector<std::int64_t>(it, elements_.end()), horizon_);
}

IntegerSet IntegerSet::intersect(const IntegerSet& other) const {
    std::vector<std::int64_t> out;
    std::set_intersection(elements_.begin(), elements_.end(), other.elements_.begin(),
                          other.elements_.end(), std::back_inserter(out));
    return IntegerSet(std::move(out), std::min(horizon_, other.horizon_));
}

bool IntegerSet::subset_of(const IntegerSet& other) const {
    return std::includes(other.elements_.begin(), other.elements_.end(), elements_.begin(),
                         elements_.end());
}

std::string IntegerSet::to_text() const {
    std::ostringstream os;
    for (auto n : elements_) os << n << '\n';
    return os.str();
}

IntegerSet IntegerSet::from_text(const std::string& text, std::int64_t horizon) {
    std::istringstream is(text);
    std::vector<std::int64_t> out;
    std::string line;
    while (std::getline(is, line)) {
        auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        std::size_t used = 0;
        long long v = 0;
        try {
            v = std::stoll(line.substr(b), &used);
        } catch (const std::exception&) {
            throw ArgumentError("not an integer: '" + line + "'");
        }
        if (line.find_first_not_of(" \t\r", b + used) != std::string::npos)
            throw ArgumentError("trailing characters in line: '" + line + "'");
        out.push_back(v);
    }
    return IntegerSet(std::move(out), horizon);
}

std::string IntegerSet::to_json() const { return nlohmann::json(elements_).dump(); }

IntegerSet IntegerSet::from_json(const std::string& text, std::int64_t horizon) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ArgumentError(std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_array()) throw ArgumentError("IntegerSet JSON must be an array");
    std::vector<std::int64_t> out;
    for (const auto& v : j) {
        if (!v.is_number_integer()) throw ArgumentError("IntegerSet JSON entries must be integers");
        out.push_back(v.get<std::int64_t>());
    }
    return IntegerSet(std::move(out), horizon);
}

mpq_class prefix_density(const IntegerSet& a, std::int64_t n) {
    if (n < 1 || n > a.horizon())
        throw RangeError("N=" + std::to_string(n) + " outside [1, horizon]");
    mpq_class q(static_cast<long>(a.count_upto(n)), static_cast<unsigned long>(n));
    q.canonicalize();
    return q;
}

std::vector<std::int64_t> default_checkpoints(std::int64_t horizon, int count) {
    std::vector<std::int64_t> out;
    for (int i = 1; i <= count; ++i) {
        std::int64_t n = horizon * i / count;
        if (n >= 1 && (out.empty() || n > out.back())) out.push_back(n);
    }
    return out;
}

DensityReport density_report(const IntegerSet& a, const std::vector<std::int64_t>& checkpoints,
                             std::optional<std::int64_t> burn_in,
                             std::optional<std::int64_t> banach_window) {
    if (checkpoints.empty()) throw ArgumentError("checkpoints must be nonempty");
    DensityReport r;
    r.horizon = a.horizon();
    std::int64_t burn = burn_in.value_or(a.horizon() / 100);
    std::vector<std::int64_t> cps = checkpoints;
    std::sort(cps.begin(), cps.end());
    cps.erase(std::unique(cps.begin(), cps.end()), cps.end());
    for (auto n : cps) r.checkpoint_densities.emplace_back(n, prefix_density(a, n));

    bool any = false;
    for (const auto& [n, q] : r.checkpoint_densities) {
        if (n <= burn) continue;
        double d = q.get_d();
        r.lower_estimate = any ? std::min(r.lower_estimate, d) : d;
        r.upper_estimate = any ? std::max(r.upper_estimate, d) : d;
        any = true;
    }
    if (!any) {
        double d = r.checkpoint_densities.back().second.get_d();
        r.lower_estimate = r.upper_estimate = d;
    }
    if (banach_window) r.banach_estimate = banach_density_estimate(a, *banach_window);
    return r;
}

double banach_density_estimate(const IntegerSet& a, std::int64_t window) {
    const std::int64_t h = a.horizon();
    if (window < 1 || window > h) throw RangeError("window outside [1, horizon]");
    const auto& e = a.elements();
    // A maximal window can be slid right until its left end is an element,
    // unless it hits the horizon; so only those starts need checking.
    std::int64_t best = a.count_upto(h) - a.count_upto(h - window);
    std::size_t j = 0;
    for (std::size_t i = 0; i < e.size(); ++i) {
        std::int64_t start = std::min(e[i], h - window + 1);
        std::int64_t end = start + window - 1;
        if (j < i) j = i;
        while (j < e.size() && e[j] <= end) ++j;
        std::int64_t first = std::lower_bound(e.begin(), e.end(), start) - e.begin();
        best = std::max<std::int64_t>(best, static_cast<std::int64_t>(j) - first);
    }
    return static_cast<double>(best) / static_cast<double>(window);
}

std::string density_report_json(const DensityReport& r) {
    nlohmann::ordered_json j;
    j["horizon"] = r.horizon;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& [n, q] : r.checkpoint_densities)
        arr.push_back({{"N", n}, {"density", q.get_str()}, {"value", q.get_d()}});
    j["checkpoint_densities"] = arr;
    j["lower_estimate"] = r.lower_estimate;
    j["upper_estimate"] = r.upper_estimate;
    if (r.banach_estimate) j["banach_estimate"] = *r.banach_estimate;
    else j["banach_estimate"] = nullptr;
    return j.dump();
}

}  // namespace hclab
