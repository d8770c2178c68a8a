// Acceptance run: one PASS/FAIL line per criterion. Exits 0 iff the failing set equals kKnownRed.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hclab/criterion.hpp"
#include "hclab/density.hpp"
#include "hclab/errors.hpp"
#include "hclab/hardy.hpp"
#include "hclab/selfmaps.hpp"
#include "hclab/setsep.hpp"
#include "hclab/shifts.hpp"

using namespace hclab;

namespace {

// Criteria whose failure is analysed in the decisions ledger.
const std::set<int> kKnownRed{7, 11};

struct Outcome {
    bool passed = false;
    std::string detail;
};

struct Criterion {
    int id;
    std::string name;
    std::function<Outcome()> run;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::pair<double, double> fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = double(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return {slope, (sy - slope * sx) / n};
}

struct Lcg {
    std::uint64_t s;
    double uniform() {
        s = s * 6364136223846793005ULL + 1442695040888963407ULL;
        return double(s >> 11) * 0x1.0p-53;
    }
    double sym() { return 2 * uniform() - 1; }
};

DiscFunction from_roots(const std::vector<cplx>& roots) {
    std::vector<cplx> p{1.0};
    for (cplx r : roots) {
        std::vector<cplx> q(p.size() + 1, 0.0);
        for (std::size_t i = 0; i < p.size(); ++i) {
            q[i + 1] += p[i];
            q[i] -= r * p[i];
        }
        p = q;
    }
    return DiscFunction::polynomial(p);
}

const DfhcConstruction& construction() {
    static const DfhcConstruction c = [] {
        DfhcOptions o;
        o.horizon = 100000;
        o.count = 4;
        return build_dfhc_pair(o);
    }();
    return c;
}

Outcome shift_exactness() {
    const auto t0 = Clock::now();
    const DfhcConstruction& c = construction();
    const WsReport ws = verify_ws(c, 1e-12);
    const ScheduleReport sched = check_schedule(c.n_schedule);
    const double secs = seconds_since(t0);
    std::ostringstream d;
    d << "WS1 " << ws.ws1 << " WS2ab " << (ws.ws2a && ws.ws2b) << " WS2c/3/4 " << (ws.ws2c && ws.ws3 && ws.ws4)
      << ", schedule " << sched.passed << ", sets " << c.set_certificate.passed << ", " << fmt("%.1f s", secs);
    return {ws.passed() && sched.passed && c.schedule_report.passed && c.set_certificate.passed && secs < 30.0,
            d.str()};
}

Outcome shift_visits() {
    const DfhcConstruction& c = construction();
    bool ok = true;
    std::ostringstream d;
    long double prev = INFINITY;
    for (int p = 1; p <= 3; ++p) {
        const long double eps = epsilon_bound(c.n_schedule, p);
        if (!(eps < prev)) ok = false;
        prev = eps;
        const OrbitSeries s = orbit_distance_series(c, p);
        long double worst = 0;
        for (const auto& r : s.rows) worst = std::max({worst, r.dist_w, r.dist_wp});
        const bool covered = s.rows.size() == c.a_sets[p - 1].size();
        const IntegerSet visits = simultaneous_visits(c, p, eps);
        const double visit_density = double(visits.size()) / double(c.horizon);
        const double a_density = double(c.a_sets[p - 1].size()) / double(c.horizon);
        ok = ok && covered && worst <= eps && visit_density >= 0.5 * a_density;
        d << "p=" << p << ": max dist " << fmt("%.2e", double(worst)) << " <= eps " << fmt("%.2e", double(eps))
          << ", visit density " << fmt("%.4f", visit_density) << " vs A_p " << fmt("%.4f", a_density) << "; ";
    }
    return {ok, d.str()};
}

Outcome set_separation() {
    const std::int64_t H = 1000000;
    using C = std::complex<double>;
    std::vector<std::pair<std::string, std::function<SeparatedFamily()>>> builders{
        {"separated_under_functions",
         [&] {
             SeparationRequest r;
             r.functions = {FunctionSpec::identity(), FunctionSpec::affine(2, 0)};
             r.count = 2;
             r.thresholds = {2, 3};
             r.horizon = H;
             return separated_under_functions(r);
         }},
        {"gap_separated",
         [&] { return gap_separated_families(FunctionSpec::identity(), FunctionSpec::affine(2, 0), {2, 2}, {}, H); }},
        {"log_linear", [&] { return log_linear_families({{C(2, 0), C(0, 0)}, {C(3, 0), C(1, 0)}}, {4, 4}, H); }},
        {"wpr", [&] { return wpr_families({FunctionSpec::affine(1, 1)}, 2, {}, H); }},
    };
    bool ok = true;
    std::ostringstream d;
    for (const auto& [name, build] : builders) {
        const auto t0 = Clock::now();
        const SeparatedFamily f = build();
        const Certificate cert = verify_family(f);
        bool floors = true;
        double worst = INFINITY;
        for (std::size_t k = 0; k < f.sets.size(); ++k) {
            // The floor's rounding loss scales as 1/N; instantiate it at each prefix length.
            const double loss = (f.asymptotic_floors[k] - f.floors[k]) * double(H);
            const DensityReport r = density_report(f.sets[k], default_checkpoints(H));
            for (const auto& [n, dens] : r.checkpoint_densities) {
                const double floor_n = std::max(0.0, f.asymptotic_floors[k] - loss / double(n));
                worst = std::min(worst, dens.get_d() - floor_n);
                if (dens.get_d() < floor_n) floors = false;
            }
            if (double(f.sets[k].size()) / double(H) < f.floors[k]) floors = false;
        }
        const double secs = seconds_since(t0);
        ok = ok && cert.passed && floors && secs < 60.0;
        d << name << ": cert " << cert.passed << ", density margin " << fmt("%.2e", worst) << ", "
          << fmt("%.1f s", secs) << "; ";
    }
    return {ok, d.str()};
}

Outcome mobius_iterates() {
    const std::vector<std::pair<std::string, MobiusMap>> maps{
        {"parabolic automorphism", HalfPlaneMap::translation(1.0).disc_map()},
        {"parabolic non-automorphism",
         HalfPlaneMap::general(MobiusMap::make(1, cplx(1, 1), 0, 1, MapDomain::half_plane)).disc_map()},
        {"hyperbolic automorphism", HalfPlaneMap::dilation(2.0).disc_map()},
        {"hyperbolic non-automorphism", HalfPlaneMap::dilation(2.0, -0.5).disc_map()},
    };
    std::vector<cplx> grid;
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j) grid.push_back(std::polar(0.05 + 0.09 * i, 0.6283185307179586 * j + 0.1 * i));
    bool ok = true;
    std::ostringstream d;
    for (const auto& [name, m] : maps) {
        const LfmClassification cls = classify(m);
        const bool want_par = name.rfind("parabolic", 0) == 0;
        const bool want_aut = name.find("non-") == std::string::npos;
        const bool class_ok = (cls.kind == LfmKind::parabolic) == want_par && cls.is_automorphism == want_aut;
        double err = 0;
        for (int n = -30; n <= 30; ++n) {
            const MobiusMap f = iterate(m, n);
            const MobiusMap step = n >= 0 ? m : m.inverse();
            for (cplx z : grid) {
                cplx w = z;
                for (int k = 0; k < std::abs(n); ++k) w = step(w);
                err = std::max(err, std::abs(f(z) - w) / (1.0 + std::abs(w)));
            }
        }
        ok = ok && class_ok && err <= 1e-8;
        d << name << (class_ok ? "" : " (misclassified)") << ": " << fmt("%.1e", err) << "; ";
    }
    return {ok, d.str()};
}

Outcome lemma_suite() {
    LemmaParams hyp;
    hyp.map = HalfPlaneMap::dilation(2.0);
    hyp.deltas = {0.1, 0.3};
    hyp.eta = 0.1;
    hyp.index_max = 30;
    LemmaParams par = hyp;
    par.map = HalfPlaneMap::translation(1.0);
    LemmaParams koebe = hyp;
    koebe.deltas = {0.1};
    const std::vector<std::pair<std::string, LemmaParams>> cases{
        {"coh2hypdifferent1", hyp}, {"coh2hypdifferent2", hyp}, {"coh2hypdifferent4", hyp},
        {"coh2pardifferent", par},  {"separedhyperbolic", hyp}, {"koebehyperbolic", koebe}};
    bool ok = true;
    std::ostringstream d;
    for (const auto& [id, params] : cases) {
        const CheckReport r = geometric_lemma_check(id, params);
        const bool good = r.passed && r.stable && std::isfinite(r.constant) && r.stability_ratio <= 2.0;
        ok = ok && good;
        d << id << " C=" << fmt("%.3g", r.constant) << " ratio " << fmt("%.2f", r.stability_ratio) << "; ";
    }
    return {ok, d.str()};
}

Outcome parabolic_asymptotics() {
    AsymptoticsOptions o;
    o.n_max = 10000;
    o.probes = {1.0, cplx(2, 3)};
    const std::vector<std::pair<std::string, HalfPlaneMap>> maps{
        {"w+1.5i", HalfPlaneMap::translation(1.5)},
        {"w+1+i", HalfPlaneMap::general(MobiusMap::make(1, cplx(1, 1), 0, 1, MapDomain::half_plane))},
    };
    bool ok = true;
    std::ostringstream d;
    for (const auto& [name, psi] : maps) {
        const OrbitAsymptotics r = orbit_asymptotics(psi, Regime::parabolic, o);
        const double scale = std::abs(r.a);
        const double ea = std::abs(r.a_fit - r.a) / scale, eb = std::abs(r.b_fit - r.b) / scale;
        ok = ok && r.has_analytic && r.bounded && ea <= 0.01 && eb <= 0.01;
        d << name << ": |a_fit-a|/|a| " << fmt("%.1e", ea) << ", |b_fit-b|/|a| " << fmt("%.1e", eb) << ", bounded "
          << r.bounded << "; ";
    }
    return {ok, d.str()};
}

Outcome hardy_cross_checks() {
    std::ostringstream d;
    Lcg g{20240601};
    double route_err = 0;
    for (int trial = 0; trial < 60; ++trial) {
        const int deg = trial % 9;
        std::vector<cplx> c(deg + 1);
        for (auto& v : c) v = cplx(g.sym(), g.sym());
        const DiscFunction f = DiscFunction::polynomial(c);
        const double a = h2_norm(f, NormRoute::coefficient).value;
        route_err = std::max({route_err, std::fabs(a - h2_norm(f, NormRoute::circle).value),
                              std::fabs(a - h2_norm(f, NormRoute::half_plane).value)});
    }
    const bool routes = route_err <= 1e-6;

    const cplx b1 = -0.5, b2 = -0.25;
    const HalfPlaneFunction F(from_roots({1.0, cayley_inverse(b1)}));
    double lo = INFINITY, hi = 0;
    for (int k = 0; k <= 6; ++k) {
        const double gamma = std::pow(4.0, k);
        const double s = dilation_integral(F, gamma, 0.5, b1, b2) * std::sqrt(gamma);
        lo = std::min(lo, s);
        hi = std::max(hi, s);
    }
    const bool gamma_law = hi / lo <= 10.0;

    const HalfPlaneFunction T(from_roots({1.0, 1.0}));
    std::vector<long> A;
    for (long n = 0; n <= 50; ++n) A.push_back(n);
    const double tau = 1.0;
    double prev = INFINITY;
    bool decreasing = true;
    for (double off : {0.0, 10.0 * tau, 100.0 * tau}) {
        const double v = translation_sum(T, tau, A, off).norm;
        if (!(v < prev)) decreasing = false;
        prev = v;
    }
    d << "routes max diff " << fmt("%.1e", route_err) << " (" << routes << "), gamma-law max/min "
      << fmt("%.3g", hi / lo) << " (" << gamma_law << "), translation sums decreasing " << decreasing;
    return {routes && gamma_law && decreasing, d.str()};
}

Outcome criterion_engine() {
    const auto t0 = Clock::now();
    CriterionConfig c;
    c.family = HyperbolicPair{2.0, 4.0};
    c.sequence = ReturnSpec::block_union(3.5, 1.5);
    c.truncation.k_max = 200;
    c.truncation.l_max = 60;
    c.truncation.window = 10;
    c.tolerance = 1e-3;
    validate_config(c);
    const ReturnSequence seq = make_return_sequence(c.sequence, family_ratio(c.family), 4000000);
    const std::size_t K = 10000;
    bool gaps = seq.size() > K;
    std::ostringstream d;
    if (gaps) {
        const GapStatistics g = gap_statistics(seq, K);
        gaps = g.floors_hold && g.p0_nondecreasing && g.p1_envelope_nondecreasing && g.p1_block_min_increasing;
        d << "gaps: floors " << g.floors_hold << ", p0 nondecreasing " << g.p0_nondecreasing
          << ", p1 envelope nondecreasing " << g.p1_envelope_nondecreasing << "; ";
    }
    const TailReport r = check_conditions(c, dense_targets(c.family, 1).front());
    const double secs = seconds_since(t0);
    for (const auto& v : r.verdicts) d << v.condition << "/" << v.op << " " << (v.passed ? "ok" : "FAIL") << " ";
    d << "; " << fmt("%.1f s", secs);
    return {gaps && r.passed && secs < 300.0, d.str()};
}

MobiusMap from_fixed_points(cplx alpha, cplx beta, cplx k) {
    const MobiusMap S = MobiusMap::make(1.0, -alpha, 1.0, -beta);
    return S.inverse().compose(MobiusMap::make(k, 0.0, 0.0, 1.0)).compose(S);
}

Outcome mixed_norm_decay() {
    const MobiusMap phi2 = HalfPlaneMap::dilation(2.0).disc_map();
    const MobiusMap phi1 = from_fixed_points(-1.0, cplx(0, 1), 1.0 / 3.0);
    const DiscFunction g = DiscFunction::polynomial({1.0, 1.0});
    const auto cert = certify_linear_vanishing(g, -1.0, 0.0, 1.0);
    const double lambda = std::abs(classify(phi2).lambda);

    std::vector<double> lx, ly;
    for (long l = 1; l <= 20; ++l) {
        lx.push_back(double(l));
        ly.push_back(std::log(mixed_composition_norm(g, cert, phi2, phi1, l, 2)));
    }
    const double slope_l = fit_line(lx, ly).first, expected = 0.5 * std::log(lambda);
    const bool l_ok = std::fabs(slope_l - expected) <= 0.25 * std::fabs(expected);

    std::vector<double> kx, ky, kv;
    for (long k = 0; k <= 20; ++k) kv.push_back(mixed_composition_norm(g, cert, phi2, phi1, 2, k));
    bool k_ok = true;
    for (std::size_t k = 1; k < kv.size(); ++k) {
        if (!(kv[k] < kv[k - 1])) k_ok = false;
        kx.push_back(double(k));
        ky.push_back(std::log(kv[k]));
    }
    const double slope_k = fit_line(kx, ky).first;
    k_ok = k_ok && slope_k < 0 && kv.back() < 1e-3 * kv.front();
    std::ostringstream d;
    d << "l-slope " << fmt("%.4f", slope_l) << " vs " << fmt("%.4f", expected) << ", k-slope " << fmt("%.4f", slope_k)
      << ", k-decreasing " << k_ok;
    return {l_ok && k_ok, d.str()};
}

Outcome valiron_example() {
    const ValironReport v = valiron_iterates(40);
    bool strict = true;
    for (std::size_t n = 1; n < v.rows.size(); ++n)
        if (!(v.rows[n].q > v.rows[n - 1].q)) strict = false;
    const bool doubling = v.rows[40].q > 2 * v.rows[5].q;
    const SeparationProfile s = orbit_separation_profile(HalfPlaneMap::dilation(2.0), HalfPlaneMap::valiron(), 20);
    const bool growing = s.tail_min_nondecreasing && s.tail_min[20] > s.tail_min[0];
    std::ostringstream d;
    d << "q strictly increasing " << strict << ", q40/q5 " << fmt("%.3f", double(v.rows[40].q / v.rows[5].q))
      << ", tail min " << fmt("%.3f", s.tail_min[0]) << " -> " << fmt("%.3f", s.tail_min[20]) << " monotone "
      << s.tail_min_nondecreasing;
    return {strict && doubling && growing, d.str()};
}

Outcome obstruction_replay() {
    const auto F = bump_train(1.0, [](std::int64_t n) { return n >= 1 && n % 2 == 0; });
    const ObstructionReport r = obstruction_experiment(F, 1.0, 2.0, {6, 8, 10, 12}, 0.2);
    std::ostringstream d;
    double worst = 0;
    for (const auto& row : r.rows) worst = std::max(worst, std::fabs(row.ratio - 1.0));
    d << "C " << fmt("%.3f", r.growth_constant) << ", worst |eps/threshold - 1| " << fmt("%.3f", worst)
      << ", consistent " << r.consistent;
    return {!r.vacuous && r.consistent && r.matches, d.str()};
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "shift construction exactness", shift_exactness},
        {2, "shift visit diagnostic", shift_visits},
        {3, "set-separation certificates", set_separation},
        {4, "Mobius iterate oracle", mobius_iterates},
        {5, "geometric lemma suite", lemma_suite},
        {6, "parabolic orbit asymptotics", parabolic_asymptotics},
        {7, "Hardy norm cross-checks", hardy_cross_checks},
        {8, "criterion engine end-to-end", criterion_engine},
        {9, "mixed-norm decay", mixed_norm_decay},
        {10, "Valiron example", valiron_example},
        {11, "obstruction replay", obstruction_replay},
    };
    std::set<int> failed;
    for (const auto& c : criteria) {
        Outcome o;
        try {
            o = c.run();
        } catch (const Error& e) {
            o = {false, std::string("error [") + e.kind() + "]: " + e.what()};
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        if (!o.passed) failed.insert(c.id);
        std::printf("%s criterion %d (%s): %s%s\n", o.passed ? "PASS" : "FAIL", c.id, c.name.c_str(), o.detail.c_str(),
                    !o.passed && kKnownRed.count(c.id) ? " [known red]" : "");
        std::fflush(stdout);
    }
    const bool expected = failed == kKnownRed;
    std::printf("failing set %s the known-red set {7, 11}\n", expected ? "equals" : "differs from");
    return expected ? 0 : 1;
}
