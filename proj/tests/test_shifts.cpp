#include <cmath>
#include <random>
#include <set>

#include <doctest.h>

#include "hclab/errors.hpp"
#include "hclab/shifts.hpp"

using namespace hclab;

namespace {

WeightSequence constant_weights(double v, std::int64_t h) { return WeightSequence::make(std::vector<double>(h, v)); }

// Smallest N ≥ lower satisfying the growth conditions, written directly with pow.
std::int64_t brute_np(int p, std::int64_t lower) {
    double fact = std::tgamma(p);
    double c = fact * std::pow(p, 2 + 2 * p);
    for (std::int64_t n = lower;; ++n) {
        double N = double(n);
        if (N < std::pow(p, 5) || n <= p) continue;
        if (std::pow(4.0, N / (N - p)) * std::pow(c, 1.0 / (N - p)) > 5.0) continue;
        if (p >= 2 && std::pow(0.2, p / (N - p)) < 1.0 / p) continue;
        if (std::pow(4.0 / 3.0, N) * std::pow(1.0 / 3.0, p) / c < 1.0) continue;
        return n;
    }
}

WeightSequence as_doubles(const std::vector<mpq_class>& w) {
    std::vector<double> v;
    for (const auto& x : w) v.push_back(x.get_d());
    return WeightSequence::make(v);
}

SparseVector z_doubles(const DfhcConstruction& c) {
    std::vector<std::pair<std::int64_t, std::complex<double>>> e;
    for (const auto& [i, v] : c.z) e.emplace_back(i, v.get_d());
    return SparseVector::make(e);
}

double l1_distance(const SparseVector& x, const std::vector<mpq_class>& target) {
    double d = 0;
    for (std::size_t j = 0; j < target.size(); ++j) d += std::abs(x.at(j) - target[j].get_d());
    for (const auto& [i, v] : x.entries)
        if (i >= static_cast<std::int64_t>(target.size())) d += std::abs(v);
    return d;
}

const DfhcConstruction& medium() {
    static const DfhcConstruction c = [] {
        DfhcOptions o;
        o.horizon = 20000;
        return build_dfhc_pair(o);
    }();
    return c;
}

}  // namespace

TEST_CASE("apply_pseudo_shift examples") {
    PseudoShiftSpec t{FunctionSpec::affine(1, 1), constant_weights(2.0, 20)};
    CHECK(apply_pseudo_shift(t, SparseVector{}).entries.empty());
    auto y = apply_pseudo_shift(t, SparseVector::basis(5));
    REQUIRE(y.entries.size() == 1);
    CHECK(y.entries[0].first == 4);
    CHECK(y.entries[0].second == std::complex<double>(2.0));

    PseudoShiftSpec d{FunctionSpec::affine(2, 0), constant_weights(1.0, 20)};
    auto e = apply_pseudo_shift(d, SparseVector::make({{2, 1.0}, {3, 1.0}}));
    REQUIRE(e.entries.size() == 1);
    CHECK(e.entries[0].first == 1);
    CHECK(e.entries[0].second == std::complex<double>(1.0));

    CHECK_THROWS_AS(apply_pseudo_shift(t, SparseVector::basis(21)), TruncationError);
}

TEST_CASE("shift_power_orbit examples") {
    auto z = SparseVector::make({{3, 1.0}, {9, -2.0}});
    auto w = constant_weights(4.0, 30);
    CHECK(shift_power_orbit(w, z, 0).entries == z.entries);
    for (std::int64_t n = 0; n <= 9; ++n) {
        auto y = shift_power_orbit(w, SparseVector::basis(9), n);
        REQUIRE(y.entries.size() == 1);
        CHECK(y.entries[0].first == 9 - n);
        CHECK(y.entries[0].second.real() == doctest::Approx(std::pow(4.0, n)).epsilon(1e-12));
    }
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    std::vector<double> ws(12);
    for (auto& x : ws) x = u(rng);
    auto rw = WeightSequence::make(ws);
    auto y = shift_power_orbit(rw, SparseVector::basis(7, 1.5), 3);
    REQUIRE(y.entries.size() == 1);
    CHECK(y.entries[0].first == 4);
    CHECK(y.entries[0].second.real() == doctest::Approx(ws[4] * ws[5] * ws[6] * 1.5).epsilon(1e-12));
    CHECK_THROWS_AS(shift_power_orbit(rw, SparseVector::basis(13), 2), TruncationError);
}

TEST_CASE("orbit equals repeated single-step pseudo-shift") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.2, 2.5);
    std::bernoulli_distribution neg(0.3);
    for (int trial = 0; trial < 40; ++trial) {
        const std::int64_t h = 80;
        std::vector<double> ws(h);
        for (auto& x : ws) x = u(rng) * (neg(rng) ? -1.0 : 1.0);
        auto w = WeightSequence::make(ws);
        std::vector<std::pair<std::int64_t, std::complex<double>>> e;
        std::uniform_int_distribution<std::int64_t> idx(0, h);
        std::set<std::int64_t> used;
        for (int k = 0; k < 6; ++k) {
            auto i = idx(rng);
            if (used.insert(i).second) e.emplace_back(i, std::complex<double>(u(rng), u(rng)));
        }
        auto z = SparseVector::make(e);
        PseudoShiftSpec t{FunctionSpec::affine(1, 1), w};
        SparseVector step = z;
        for (std::int64_t n = 1; n <= 50; ++n) {
            step = apply_pseudo_shift(t, step);
            auto direct = shift_power_orbit(w, z, n);
            REQUIRE(direct.entries.size() == step.entries.size());
            for (std::size_t k = 0; k < step.entries.size(); ++k) {
                CHECK(direct.entries[k].first == step.entries[k].first);
                CHECK(std::abs(direct.entries[k].second - step.entries[k].second) <=
                      1e-9 * std::abs(step.entries[k].second));
            }
        }
    }
}

TEST_CASE("default schedule is the smallest admissible one") {
    auto ns = default_schedule(4);
    REQUIRE(ns.size() == 4);
    std::int64_t prev = 0;
    for (int p = 1; p <= 4; ++p) {
        std::int64_t n = brute_np(p, std::max<std::int64_t>(prev + 1, p + 1));
        CHECK(ns[p - 1] == n);
        prev = n;
    }
    CHECK(check_schedule(ns).passed);
    for (int p = 1; p < 4; ++p) CHECK(epsilon_bound(ns, p + 1) < epsilon_bound(ns, p));
}

TEST_CASE("schedule violations name the inequality") {
    DfhcOptions o;
    o.horizon = 2000;
    o.count = 2;
    o.schedule = std::vector<std::int64_t>{8, 33};
    try {
        build_dfhc_pair(o);
        FAIL("expected a precondition error");
    } catch (const PreconditionError& e) {
        CHECK(std::string(e.what()).find("filler upper bound") != std::string::npos);
        CHECK(std::string(e.what()).find("p=2") != std::string::npos);
    }
    o.count = 1;
    o.schedule = std::vector<std::int64_t>{7};
    CHECK_THROWS_AS(build_dfhc_pair(o), PreconditionError);
    o.schedule = std::vector<std::int64_t>{8};
    CHECK_NOTHROW(build_dfhc_pair(o));
}

TEST_CASE("targets respect the modulus window") {
    for (int p = 1; p <= 6; ++p) {
        auto t = default_targets(p);
        REQUIRE(t.a.size() == static_cast<std::size_t>(p));
        for (int i = 0; i < p; ++i) {
            CHECK(abs(t.a[i]) >= mpq_class(1, p));
            CHECK(abs(t.a[i]) <= p);
            CHECK(t.b[i] == t.a[p - 1 - i]);
        }
    }
    CHECK(default_targets(1).a[0] == 1);
    DfhcOptions o;
    o.horizon = 500;
    o.count = 1;
    o.targets = [](int) { return TargetPair{{mpq_class(2)}, {mpq_class(1)}}; };
    CHECK_THROWS_AS(build_dfhc_pair(o), PreconditionError);
}

TEST_CASE("construction satisfies WS1-WS4 exactly") {
    const auto& c = medium();
    for (int k = 0; k < 3; ++k) CHECK_FALSE(c.a_sets[k].empty());
    CHECK(c.set_certificate.passed);

    // Block products and weight bounds, recomputed here.
    for (std::size_t k = 0; k < c.blocks.size(); ++k) {
        std::int64_t s = c.blocks[k], e = k + 1 < c.blocks.size() ? c.blocks[k + 1] : c.horizon + 1;
        mpq_class prod = 1, prodp = 1;
        for (std::int64_t n = s; n < e; ++n) prod *= c.w[n - 1], prodp *= c.wp[n - 1];
        mpz_class four;
        mpz_ui_pow_ui(four.get_mpz_t(), 4, e - s);
        CHECK(prod == mpq_class(four));
        CHECK(prodp == mpq_class(four));
    }
    for (std::int64_t n = 1; n <= c.horizon; ++n) {
        double a = std::fabs(c.w[n - 1].get_d()), b = std::fabs(c.wp[n - 1].get_d());
        REQUIRE(a <= 5.0 * (1 + 1e-12));
        REQUIRE(b <= 5.0 * (1 + 1e-12));
        REQUIRE(a >= (1.0 / n) * (1 - 1e-12));
        REQUIRE(b >= (1.0 / n) * (1 - 1e-12));
    }
    for (const auto& [i, v] : c.z) {
        auto it = std::upper_bound(c.blocks.begin(), c.blocks.end(), i);
        std::size_t k = std::distance(c.blocks.begin(), it) - 1;
        int p = c.block_p[k];
        std::int64_t l = i - c.blocks[k];
        REQUIRE(l < p);
        mpz_class num, den;
        mpz_ui_pow_ui(num.get_mpz_t(), p, 1 + 2 * l);
        mpz_ui_pow_ui(den.get_mpz_t(), 4, c.blocks[k] - 1);
        CHECK(abs(v) <= mpq_class(num, den));
    }
    auto r = verify_ws(c);
    CHECK(r.passed());
    CHECK(r.failures.empty());
    CHECK(r.blocks_checked == static_cast<std::int64_t>(c.blocks.size()));
}

TEST_CASE("verify_ws catches tampering") {
    DfhcOptions o;
    o.horizon = 3000;
    o.count = 2;
    auto c = build_dfhc_pair(o);
    REQUIRE(verify_ws(c).passed());
    auto bad = c;
    bad.w[c.blocks[1] + 5] *= mpq_class(1001, 1000);
    auto r = verify_ws(bad);
    CHECK_FALSE(r.ws1);
    bad = c;
    bad.z.emplace_back(c.horizon, mpq_class(1, 7));
    CHECK_FALSE(verify_ws(bad).ws2d);
    bad = c;
    bad.wp[c.blocks[0] - 1] *= 2;
    CHECK_FALSE(verify_ws(bad).ws2b);
}

TEST_CASE("orbit distances agree with the direct orbit and stay below epsilon") {
    DfhcOptions o;
    o.horizon = 400;
    o.count = 2;
    auto c = build_dfhc_pair(o);
    REQUIRE_FALSE(c.a_sets[1].empty());
    auto w = as_doubles(c.w), wp = as_doubles(c.wp);
    auto z = z_doubles(c);
    for (int p = 1; p <= 2; ++p) {
        auto series = orbit_distance_series(c, p);
        REQUIRE(series.rows.size() == c.a_sets[p - 1].size());
        for (const auto& row : series.rows) {
            auto bw = shift_power_orbit(w, z, row.n);
            auto bwp = shift_power_orbit(wp, z, row.n);
            double dw = l1_distance(bw, c.targets[p - 1].a), dwp = l1_distance(bwp, c.targets[p - 1].b);
            CHECK(std::fabs((double)row.dist_w - dw) <= 1e-12);
            CHECK(std::fabs((double)row.dist_wp - dwp) <= 1e-12);
            CHECK(row.dist_w <= series.epsilon);
            CHECK(row.dist_wp <= series.epsilon);
            // distance ≤ ‖B^n z‖ + ‖target‖
            double tn = 0;
            for (const auto& a : c.targets[p - 1].a) tn += std::fabs(a.get_d());
            CHECK(row.dist_w <= bw.norm(1) + tn + 1e-12);
        }
    }
    // A set not aligned with the blocks is far from the target.
    auto off = orbit_distance_series(c, 1, IntegerSet({c.blocks[0] + 1}, c.horizon));
    CHECK(off.rows[0].dist_w > off.epsilon);
}

TEST_CASE("constructed coincidence gives distance zero") {
    const auto& c = medium();
    auto s = orbit_distance_series(c, 2);
    REQUIRE_FALSE(s.rows.empty());
    auto n = s.rows[0].n;
    // Head coordinates are exact; the remaining mass is the tail of later blocks.
    auto bw = shift_power_orbit(as_doubles(c.w), z_doubles(c), n);
    CHECK(std::abs(bw.at(0) - c.targets[1].a[0].get_d()) <= 1e-12);
    CHECK(s.rows[0].dist_w < 1e-20);
}

TEST_CASE("construction orbits at every covered p") {
    const auto& c = medium();
    for (int p = 1; p <= c.count; ++p) {
        auto s = orbit_distance_series(c, p);
        for (const auto& row : s.rows) {
            CHECK(row.dist_w <= s.epsilon);
            CHECK(row.dist_wp <= s.epsilon);
        }
        auto visits = simultaneous_visits(c, p, s.epsilon);
        CHECK(c.a_sets[p - 1].subset_of(visits));
    }
}

TEST_CASE("greedy sets are separated and deterministic") {
    const auto& c = medium();
    std::vector<std::pair<std::int64_t, int>> all;
    for (int k = 0; k < c.count; ++k)
        for (auto n : c.a_sets[k].elements()) all.emplace_back(n, k);
    std::sort(all.begin(), all.end());
    for (std::size_t i = 0; i < all.size(); ++i) {
        CHECK(all[i].first >= c.n_schedule[all[i].second]);
        for (std::size_t j = i + 1; j < all.size() && all[j].first - all[i].first < 2100; ++j)
            CHECK(all[j].first - all[i].first >= c.n_schedule[all[i].second] + c.n_schedule[all[j].second]);
    }
    DfhcOptions o;
    o.horizon = 20000;
    auto again = build_dfhc_pair(o);
    CHECK(again.blocks == c.blocks);
    CHECK(again.w == c.w);
}

TEST_CASE("pipeline set source") {
    DfhcOptions o;
    o.horizon = 20000;
    o.count = 2;
    o.source = SetSource::pipeline;
    auto c = build_dfhc_pair(o);
    CHECK(c.source == "pipeline");
    CHECK(verify_ws(c).passed());
    CHECK_FALSE(c.a_sets[0].empty());
}
