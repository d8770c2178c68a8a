#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>

#include "hclab/errors.hpp"
#include "hclab/setsep.hpp"

using namespace hclab;

namespace {

struct Tagged {
    std::int64_t n;
    int set;
};

std::vector<Tagged> tagged(const SeparatedFamily& f) {
    std::vector<Tagged> out;
    for (int k = 0; k < static_cast<int>(f.sets.size()); ++k)
        for (auto n : f.sets[k].elements()) out.push_back({n, k});
    return out;
}

// Quadratic scan over all pairs of (set, element, function) triples.
template <class Fn>
std::int64_t brute_violations(const SeparatedFamily& f, const std::vector<Fn>& fns, bool corollary) {
    auto all = tagged(f);
    std::int64_t bad = 0;
    for (std::size_t x = 0; x < all.size(); ++x)
        for (std::size_t y = 0; y < all.size(); ++y)
            for (std::size_t i = 0; i < fns.size(); ++i)
                for (std::size_t j = 0; j < fns.size(); ++j) {
                    bool distinct = corollary ? (all[x].n != all[y].n || i != j) : all[x].n != all[y].n;
                    if (!distinct) continue;
                    double gap = std::abs(fns[i](all[x].n) - fns[j](all[y].n));
                    if (gap < f.thresholds[all[x].set] + f.thresholds[all[y].set] - 1e-9) ++bad;
                }
    return bad;
}

void check_floors(const SeparatedFamily& f) {
    for (std::size_t k = 0; k < f.sets.size(); ++k) {
        double measured = static_cast<double>(f.sets[k].size()) / static_cast<double>(f.horizon);
        CHECK(measured >= f.floors[k]);
    }
}

}  // namespace

TEST_CASE("thin_image_subset") {
    auto evens = IntegerSet::residue_class(0, 2, 10000);
    auto half = FunctionSpec::affine(Fraction::make(1, 1), Fraction::make(1, 2));
    CHECK(thin_image_subset(evens, half, 0.1) == evens);

    auto all = IntegerSet::interval(1, 100000, 100000);
    auto every20 = thin_image_subset(all, FunctionSpec::identity(), 0.1);
    CHECK(every20.size() == 5000);
    CHECK(every20.elements()[0] == 20);
    CHECK(every20.elements()[1] == 40);
    CHECK(prefix_density(every20, 100000) == mpq_class(1, 20));

    auto doubled = thin_image_subset(all, FunctionSpec::affine(2, 0), 0.25);
    // Exhaustive image count: h(B') ∩ [1, H] over H.
    std::int64_t hits = 0;
    for (auto b : doubled.elements())
        if (2 * b <= 100000) ++hits;
    CHECK(double(hits) / 100000.0 < 0.25);
    CHECK(doubled.subset_of(all));
    CHECK(!doubled.empty());

    CHECK_THROWS_AS(thin_image_subset(all, FunctionSpec::identity(), 0.0), ArgumentError);
    CHECK_THROWS_AS(thin_image_subset(all, FunctionSpec::identity(), 1.0), ArgumentError);
}

TEST_CASE("collision_free_subset") {
    const std::int64_t h = 1000;
    auto a = IntegerSet::residue_class(1, 3, h);
    CHECK(collision_free_subset(a, {FunctionSpec::affine(1, h + 1)}) == a);

    auto all = IntegerSet::interval(1, h, h);
    auto succ = collision_free_subset(all, {FunctionSpec::affine(1, 1)});
    for (std::size_t i = 1; i < succ.size(); ++i)
        CHECK(succ.elements()[i] - succ.elements()[i - 1] >= 2);
    CHECK(double(succ.size()) / h >= 1.0 / 3.0);

    auto dbl = collision_free_subset(all, {FunctionSpec::affine(2, 0)});
    std::set<std::int64_t> s(dbl.elements().begin(), dbl.elements().end());
    for (auto n : dbl.elements())
        for (auto m : dbl.elements())
            if (n != m) CHECK_FALSE(n == 2 * m);
    CHECK(double(dbl.size()) / h >= 1.0 / 3.0);

    CHECK_THROWS_AS(collision_free_subset(all, {FunctionSpec::log_linear(0, 0)}), ArgumentError);
}

TEST_CASE("separated_under_functions: identity, residue classes") {
    SeparationRequest r;
    r.functions = {FunctionSpec::identity()};
    r.count = 2;
    r.thresholds = {2, 2};
    r.horizon = 100000;
    auto fam = separated_under_functions(r);
    CHECK(fam.certificate.passed);
    // Pairwise gaps: the merged sorted union has adjacent differences ≥ 4.
    std::vector<std::int64_t> merged;
    for (const auto& s : fam.sets) merged.insert(merged.end(), s.elements().begin(), s.elements().end());
    std::sort(merged.begin(), merged.end());
    for (std::size_t i = 1; i < merged.size(); ++i) CHECK(merged[i] - merged[i - 1] >= 4);
    for (int k = 0; k < 2; ++k) {
        std::int64_t mod = std::int64_t(2) << k;
        for (auto n : fam.sets[k].elements()) CHECK(n % mod == mod / 2);
        CHECK(fam.sets[k].elements().front() >= 2);
        CHECK(!fam.sets[k].empty());
    }
    check_floors(fam);
}

TEST_CASE("separated_under_functions: single set") {
    SeparationRequest r;
    r.functions = {FunctionSpec::identity()};
    r.count = 1;
    r.thresholds = {1};
    r.base_sets = {IntegerSet::interval(1, 5000, 5000)};
    r.horizon = 5000;
    auto fam = separated_under_functions(r);
    CHECK(fam.certificate.passed);
    CHECK(fam.sets[0].elements().front() >= 1);
    for (std::size_t i = 1; i < fam.sets[0].size(); ++i)
        CHECK(fam.sets[0].elements()[i] - fam.sets[0].elements()[i - 1] >= 2);
}

TEST_CASE("separated_under_functions: {2n, n}") {
    SeparationRequest r;
    r.functions = {FunctionSpec::affine(2, 0), FunctionSpec::identity()};
    r.count = 2;
    r.thresholds = {3, 3};
    r.horizon = 20000;
    auto fam = separated_under_functions(r);
    CHECK(fam.certificate.passed);
    std::vector<std::function<double(std::int64_t)>> fns = {[](std::int64_t n) { return 2.0 * n; },
                                                            [](std::int64_t n) { return double(n); }};
    CHECK(brute_violations(fam, fns, false) == 0);
    check_floors(fam);
}

TEST_CASE("separated_under_functions: errors and determinism") {
    SeparationRequest r;
    r.functions = {FunctionSpec::identity()};
    r.count = 2;
    r.thresholds = {2, 2};
    r.horizon = 30000;
    auto a = separated_under_functions(r);
    auto b = separated_under_functions(r);
    CHECK(a.sets == b.sets);
    CHECK(family_to_json(a).dump() == family_to_json(b).dump());

    r.thresholds = {2, 40000};
    CHECK_THROWS_AS(separated_under_functions(r), ConstructionError);
    try {
        separated_under_functions(r);
    } catch (const ConstructionError& e) {
        CHECK(e.index() == 2);
    }
    r.thresholds = {2};
    CHECK_THROWS_AS(separated_under_functions(r), ArgumentError);
}

TEST_CASE("gap_separated_families") {
    auto fam = gap_separated_families(FunctionSpec::identity(), FunctionSpec::affine(2, 0), {2, 2}, {}, 20000);
    CHECK(fam.certificate.passed);
    std::vector<std::function<double(std::int64_t)>> fns = {[](std::int64_t n) { return double(n); },
                                                            [](std::int64_t n) { return 2.0 * n; }};
    CHECK(brute_violations(fam, fns, true) == 0);
    check_floors(fam);

    CHECK_THROWS_AS(gap_separated_families(FunctionSpec::identity(), FunctionSpec::identity(), {2, 2}, {}, 1000),
                    InfeasibleError);

    auto lg = gap_separated_families(FunctionSpec::log_linear(1, 0), FunctionSpec::log_linear(3, 0), {5, 5}, {},
                                     10000);
    CHECK(lg.certificate.passed);
    std::vector<std::function<double(std::int64_t)>> lfns = {[](std::int64_t n) { return double(n); },
                                                             [](std::int64_t n) { return 3.0 * n; }};
    CHECK(brute_violations(lg, lfns, true) == 0);
}

TEST_CASE("log_linear_families") {
    using C = std::complex<double>;
    auto same = log_linear_families({{C(2, 0), C(0, 0)}, {C(3, 0), C(0, 0)}}, {4, 4}, 10000);
    CHECK(same.certificate.passed);
    std::vector<std::function<double(std::int64_t)>> fns = {[](std::int64_t n) { return 2.0 * n; },
                                                            [](std::int64_t n) { return 3.0 * n; }};
    CHECK(brute_violations(same, fns, true) == 0);

    auto opp = log_linear_families({{C(-2, 0), C(0, 0)}, {C(2, 0), C(0, 0)}}, {4, 4}, 10000);
    CHECK(opp.certificate.passed);
    std::vector<std::function<double(std::int64_t)>> ofns = {[](std::int64_t n) { return -2.0 * n; },
                                                             [](std::int64_t n) { return 2.0 * n; }};
    CHECK(brute_violations(opp, ofns, true) == 0);
    CHECK(!opp.entry_thresholds.empty());
    for (std::size_t k = 0; k < opp.sets.size(); ++k)
        if (!opp.sets[k].empty()) CHECK(opp.sets[k].elements().front() >= opp.entry_thresholds[k]);

    auto logs = log_linear_families({{C(2, 0), C(0, 0)}, {C(2, 0), C(1, 0)}}, {1, 1}, 1000000);
    CHECK(logs.certificate.passed);
    CHECK(logs.certificate.values_checked > 0);

    // Complex coefficients: separation certified on the modulus directly.
    auto cplx = log_linear_families({{C(2, 1), C(0, 0.5)}, {C(3, -1), C(1, 0)}}, {2, 2}, 5000);
    CHECK(cplx.certificate.passed);
    auto all = tagged(cplx);
    std::int64_t bad = 0;
    for (auto& x : all)
        for (auto& y : all)
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) {
                    if (x.n == y.n && i == j) continue;
                    auto v = [&](int idx, std::int64_t n) {
                        return cplx.complex_pairs[idx].first * double(n) +
                               cplx.complex_pairs[idx].second * std::log(double(n));
                    };
                    if (std::abs(v(i, x.n) - v(j, y.n)) < 4.0 - 1e-9) ++bad;
                }
    CHECK(bad == 0);

    CHECK_THROWS_AS(log_linear_families({{C(2, 0), C(1, 0)}, {C(2, 0), C(1, 0)}}, {1, 1}, 1000), ArgumentError);
}

TEST_CASE("wpr_families") {
    auto shift = wpr_families({FunctionSpec::affine(1, 1)}, 2, {}, 20000);
    CHECK(shift.certificate.passed);
    // Images {m+1..m+j} and {n+1..n+l} disjoint for distinct m, n.
    auto all = tagged(shift);
    std::map<std::int64_t, std::int64_t> owner;
    bool clash = false;
    for (auto& t : all)
        for (std::int64_t p = 1; p <= t.set + 1; ++p) {
            auto [it, fresh] = owner.emplace(t.n + p, t.n);
            if (!fresh && it->second != t.n) clash = true;
        }
    CHECK_FALSE(clash);

    auto two = wpr_families({FunctionSpec::affine(1, 3), FunctionSpec::affine(1, 5)}, 2, {}, 20000);
    CHECK(two.certificate.passed);
    std::map<std::int64_t, std::int64_t> owner2;
    bool clash2 = false;
    for (auto& t : tagged(two))
        for (std::int64_t q : {3, 5})
            for (std::int64_t p = 1; p <= t.set + 1; ++p) {
                auto [it, fresh] = owner2.emplace(p + q * t.n, t.n);
                if (!fresh && it->second != t.n) clash2 = true;
            }
    CHECK_FALSE(clash2);

    auto single = wpr_families({FunctionSpec::affine(2, 1)}, 1, {}, 5000);
    CHECK(single.certificate.passed);
    CHECK(single.sets[0].size() > 0);
    CHECK(single.certificate.unverifiable > 0);

    CHECK_THROWS_AS(wpr_families({FunctionSpec::log_linear(1, 0)}, 2, {}, 1000), ArgumentError);
}

TEST_CASE("verifier catches planted violations") {
    SeparationRequest r;
    r.functions = {FunctionSpec::identity()};
    r.count = 2;
    r.thresholds = {2, 2};
    r.horizon = 10000;
    auto fam = separated_under_functions(r);
    REQUIRE(fam.certificate.passed);
    auto j = family_to_json(fam);
    // Move an element of A_1 next to another one: gap 2 < 4.
    auto e0 = j["sets"][0][0].get<std::int64_t>();
    auto e1 = j["sets"][0][1].get<std::int64_t>();
    (void)e1;
    j["sets"][0][1] = e0 + 2;
    j["base_sets"][0].push_back(e0 + 2);
    auto base = j["base_sets"][0].get<std::vector<std::int64_t>>();
    std::sort(base.begin(), base.end());
    base.erase(std::unique(base.begin(), base.end()), base.end());
    j["base_sets"][0] = base;
    auto broken = family_from_json(j);
    auto cert = verify_family(broken);
    CHECK_FALSE(cert.passed);
    CHECK_FALSE(cert.separation_ok);
    REQUIRE(!cert.violations.empty());
    CHECK(cert.violations[0].n == e0);
    CHECK(cert.violations[0].m == e0 + 2);

    auto j2 = family_to_json(fam);
    j2["bogus"] = 1;
    CHECK_THROWS_AS(family_from_json(j2), ArgumentError);
}

TEST_CASE("property: random requests yield certified families") {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> coin(0, 3), thr(1, 4), cnt(1, 3);
    for (int trial = 0; trial < 12; ++trial) {
        SeparationRequest r;
        r.count = cnt(rng);
        r.horizon = 20000;
        for (int k = 0; k < r.count; ++k) r.thresholds.push_back(thr(rng));
        r.functions.clear();
        int nf = 1 + coin(rng) % 2;
        for (int i = 0; i < nf; ++i) {
            switch (coin(rng)) {
                case 0: r.functions.push_back(FunctionSpec::identity()); break;
                case 1: r.functions.push_back(FunctionSpec::affine(2, 1)); break;
                case 2: r.functions.push_back(FunctionSpec::affine(Fraction::make(3, 2), Fraction::make(0, 1))); break;
                default: r.functions.push_back(FunctionSpec::log_linear(1.5, 1.0)); break;
            }
        }
        auto fam = separated_under_functions(r);
        CHECK(fam.certificate.passed);
        check_floors(fam);
        for (int k = 0; k < r.count; ++k) {
            CHECK(fam.sets[k].subset_of(fam.base_sets[k]));
            if (!fam.sets[k].empty()) CHECK(fam.sets[k].elements().front() >= r.thresholds[k]);
        }
        std::vector<std::function<double(std::int64_t)>> fns;
        for (const auto& f : r.functions) {
            if (f.kind == FunctionSpec::Kind::identity) fns.push_back([](std::int64_t n) { return double(n); });
            else if (f.kind == FunctionSpec::Kind::log_linear)
                fns.push_back([](std::int64_t n) { return 1.5 * n + std::log(double(n)); });
            else {
                double a = double(f.a.num) / f.a.den, b = double(f.b.num) / f.b.den;
                fns.push_back([a, b](std::int64_t n) { return a * n + b; });
            }
        }
        // Sampled brute force: restrict to the first 300 elements of each set.
        SeparatedFamily head = fam;
        for (auto& s : head.sets) {
            auto v = s.elements();
            if (v.size() > 300) v.resize(300);
            s = IntegerSet(v, s.horizon());
        }
        CHECK(brute_violations(head, fns, false) == 0);
    }
}

TEST_CASE("function spec parsing and evaluation") {
    auto f = FunctionSpec::from_json(nlohmann::json::parse(R"({"kind":"affine","a":"3/2","b":0.5})"));
    CHECK(f.a == Fraction::make(3, 2));
    CHECK(f.b == Fraction::make(1, 2));
    CHECK(f.key(3) == 5);  // 4.5 + 0.5
    CHECK(f.integral_at(3));
    CHECK_FALSE(f.integral_at(2));
    auto it = FunctionSpec::iterated_map(FunctionSpec::affine(2, 1), 3);
    CHECK(it.key(0) == 3);
    CHECK(it.key(4) == 63);  // 3 → 7 → 15 → 31 → 63
    CHECK(it.key(200) == FunctionSpec::kCap);
    CHECK(FunctionSpec::from_json(it.to_json()).key(5) == 127);
    CHECK_THROWS_AS(FunctionSpec::from_json(nlohmann::json::parse(R"({"kind":"affine","a":1,"b":0,"c":2})")),
                    ArgumentError);
    CHECK_THROWS_AS(FunctionSpec::from_json(nlohmann::json::parse(R"({"kind":"affine","a":0.1,"b":0})")),
                    ArgumentError);
    auto sh = FunctionSpec::shifted(FunctionSpec::log_linear(2, 1), -3);
    CHECK(sh.key(10) == static_cast<std::int64_t>(std::floor(20 + std::log(10.0) - 3)));
}
