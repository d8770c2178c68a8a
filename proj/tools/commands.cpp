#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "cli.hpp"
#include "hclab/criterion.hpp"
#include "hclab/hardy.hpp"
#include "hclab/mobius.hpp"
#include "hclab/selfmaps.hpp"
#include "hclab/setsep.hpp"
#include "hclab/shifts.hpp"

namespace hclab::cli {

Cfg::Cfg(const json& j, std::string pointer) : j_(j), pointer_(std::move(pointer)) {
    if (!j_.is_object()) throw ConfigError((pointer_.empty() ? std::string("/") : pointer_) + " must be an object");
}

bool Cfg::has(const std::string& key) const { return j_.contains(key); }

const json& Cfg::raw(const std::string& key) {
    if (!has(key)) throw ConfigError("missing key " + at(key));
    used_.insert(key);
    return j_.at(key);
}

Cfg Cfg::sub(const std::string& key) { return Cfg(raw(key), at(key)); }

void Cfg::done() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
        if (!used_.count(it.key())) throw ConfigError("unknown key " + at(it.key()));
}

namespace {

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(17);
    s << v;
    return s.str();
}

std::string plot_csv(const std::string& x, const std::string& y, const std::vector<std::pair<double, double>>& pts) {
    std::string out = x + "," + y + "\n";
    for (const auto& [a, b] : pts) out += fmt(a) + "," + fmt(b) + "\n";
    return out;
}

std::vector<IntegerSet> base_sets_from(Cfg& c, const std::string& key, std::int64_t horizon) {
    std::vector<IntegerSet> out;
    if (!c.has(key)) return out;
    const json& arr = c.raw(key);
    if (!arr.is_array()) throw ConfigError(c.at(key) + " must be an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string ptr = c.at(key) + "/" + std::to_string(i);
        if (arr[i].is_array()) {
            out.push_back(parse_at(ptr, [&] { return IntegerSet(arr[i].get<std::vector<std::int64_t>>(), horizon); }));
        } else {
            Cfg r(arr[i], ptr);
            const auto residue = r.req<std::int64_t>("residue");
            const auto modulus = r.req<std::int64_t>("modulus");
            const auto from = r.get<std::int64_t>("from", 1);
            r.done();
            out.push_back(parse_at(ptr, [&] { return IntegerSet::residue_class(residue, modulus, horizon, from); }));
        }
    }
    return out;
}

std::vector<FunctionSpec> functions_from(Cfg& c, const std::string& key) {
    const json& arr = c.raw(key);
    if (!arr.is_array()) throw ConfigError(c.at(key) + " must be an array");
    std::vector<FunctionSpec> fs;
    for (std::size_t i = 0; i < arr.size(); ++i)
        fs.push_back(parse_at(c.at(key) + "/" + std::to_string(i), [&] { return FunctionSpec::from_json(arr[i]); }));
    return fs;
}

Result family_result(const SeparatedFamily& fam) {
    Result r;
    r.passed = fam.certificate.passed;
    r.result = {{"family", family_to_json(fam)}};
    r.csv = "set,size,floor,lower_estimate,upper_estimate\n";
    for (std::size_t k = 0; k < fam.sets.size(); ++k) {
        r.csv += std::to_string(k + 1) + "," + std::to_string(fam.sets[k].size()) + "," +
                 (k < fam.floors.size() ? fmt(fam.floors[k]) : "") + ",";
        if (k < fam.density_reports.size())
            r.csv += fmt(fam.density_reports[k].lower_estimate) + "," + fmt(fam.density_reports[k].upper_estimate);
        else
            r.csv += ",";
        r.csv += "\n";
    }
    return r;
}

DfhcOptions shift_options(Cfg& c) {
    DfhcOptions o;
    o.horizon = c.get<std::int64_t>("horizon", o.horizon);
    o.count = c.get<int>("count", o.count);
    if (c.has("schedule")) o.schedule = c.get<std::vector<std::int64_t>>("schedule", {});
    const std::string src = c.get<std::string>("source", "greedy");
    if (src == "pipeline") o.source = SetSource::pipeline;
    else if (src != "greedy") throw ConfigError(c.at("source") + " must be \"greedy\" or \"pipeline\"");
    return o;
}

DfhcConstruction build_shifts(const DfhcOptions& o, const std::string& ptr) {
    try {
        return build_dfhc_pair(o);
    } catch (const ArgumentError& e) {
        throw ConfigError(ptr + ": " + e.what());
    }
}

std::string schedule_csv(const DfhcConstruction& c) {
    std::string s = "p,N_p,set_size,epsilon\n";
    for (int p = 1; p <= c.count; ++p)
        s += std::to_string(p) + "," + std::to_string(c.n_schedule[p - 1]) + "," +
             std::to_string(c.a_sets[p - 1].size()) + "," + fmt(double(epsilon_bound(c.n_schedule, p))) + "\n";
    return s;
}

json density_json(const DensityReport& d) { return json::parse(density_report_json(d)); }

CriterionConfig criterion_config(const json& j, const std::string& ptr) {
    try {
        return CriterionConfig::from_json(j);
    } catch (const ConfigError& e) {
        throw ConfigError(ptr + e.what());
    } catch (const Error& e) {
        throw ConfigError((ptr.empty() ? std::string("/") : ptr) + ": " + e.what());
    }
}

std::vector<DenseElement> targets_of(const CriterionConfig& c) {
    return c.targets.empty() ? dense_targets(c.family, 1) : c.targets;
}

// Builds B_p = identity-separated sets for function families.
std::optional<SeparatedFamily> index_sets(Cfg& c, int count) {
    if (!c.has("sets")) return std::nullopt;
    Cfg s = c.sub("sets");
    SeparationRequest req;
    req.functions = {FunctionSpec::identity()};
    req.count = count;
    req.horizon = s.get<std::int64_t>("horizon", 2000);
    req.thresholds = s.get<std::vector<std::int64_t>>("thresholds", std::vector<std::int64_t>(count, 2));
    req.base_sets = base_sets_from(s, "base_sets", req.horizon);
    s.done();
    return parse_at(s.pointer(), [&] { return separated_under_functions(req); });
}

}  // namespace

// ---------------------------------------------------------------------------

Result sets_build(Invocation& in) {
    Cfg c(in.config, "");
    const std::string method = c.get<std::string>("method", "separated_under_functions");
    const auto horizon = c.get<std::int64_t>("horizon", 100000);
    const auto thresholds = c.get<std::vector<std::int64_t>>("thresholds", {2, 2});
    const int count = c.get<int>("count", static_cast<int>(thresholds.size()));
    auto bases = base_sets_from(c, "base_sets", horizon);
    SeparatedFamily fam;
    if (method == "separated_under_functions") {
        SeparationRequest req;
        req.functions = c.has("functions") ? functions_from(c, "functions") : std::vector{FunctionSpec::identity()};
        req.base_sets = bases;
        req.thresholds = thresholds;
        req.count = count;
        req.horizon = horizon;
        c.done();
        fam = parse_at("/", [&] { return separated_under_functions(req); });
    } else if (method == "gap_separated") {
        const FunctionSpec phi1 = parse_at(c.at("phi1"), [&] { return FunctionSpec::from_json(c.raw("phi1")); });
        const FunctionSpec phi2 = parse_at(c.at("phi2"), [&] { return FunctionSpec::from_json(c.raw("phi2")); });
        c.done();
        if (bases.empty()) bases = default_base_sets(count, horizon, thresholds);
        fam = parse_at("/", [&] { return gap_separated_families(phi1, phi2, thresholds, bases, horizon); });
    } else if (method == "log_linear") {
        const json& arr = c.raw("pairs");
        if (!arr.is_array()) throw ConfigError("/pairs must be an array");
        std::vector<std::pair<cplx, cplx>> pairs;
        for (std::size_t i = 0; i < arr.size(); ++i) {
            Cfg p(arr[i], "/pairs/" + std::to_string(i));
            const cplx a = parse_at(p.at("a"), [&] { return complex_from_json(p.raw("a")); });
            const cplx b = parse_at(p.at("b"), [&] { return complex_from_json(p.raw("b")); });
            p.done();
            pairs.emplace_back(a, b);
        }
        c.done();
        fam = parse_at("/", [&] { return log_linear_families(pairs, thresholds, horizon, bases); });
    } else if (method == "wpr") {
        auto fs = functions_from(c, "functions");
        const int levels = c.get<int>("levels", count);
        c.done();
        if (bases.empty()) bases = default_base_sets(levels, horizon, std::vector<std::int64_t>(levels, 1));
        fam = parse_at("/", [&] { return wpr_families(fs, levels, bases, horizon); });
    } else {
        throw ConfigError("/method must be one of separated_under_functions, gap_separated, log_linear, wpr");
    }
    return family_result(fam);
}

Result sets_verify(Invocation& in) {
    Cfg c(in.config, "");
    json fj;
    if (c.has("schema_version")) {
        // a `sets build` report
        c.raw("schema_version");
        for (const char* k : {"command", "config", "passed", "seed", "notes"})
            if (c.has(k)) c.raw(k);
        const json& res = c.raw("result");
        if (!res.is_object() || !res.contains("family")) throw ConfigError("/result/family is missing");
        fj = res.at("family");
    } else {
        fj = c.raw("family");
    }
    c.done();
    SeparatedFamily fam = parse_at("/family", [&] { return family_from_json(fj); });
    const std::size_t max_v = 16;
    fam.certificate = verify_family(fam, max_v);
    Result r;
    r.passed = fam.certificate.passed;
    r.result = {{"certificate", certificate_to_json(fam.certificate)}};
    r.csv = "set_a,fn_a,n,set_b,fn_b,m,gap,required\n";
    for (const auto& v : fam.certificate.violations)
        r.csv += std::to_string(v.set_a) + "," + std::to_string(v.fn_a) + "," + std::to_string(v.n) + "," +
                 std::to_string(v.set_b) + "," + std::to_string(v.fn_b) + "," + std::to_string(v.m) + "," +
                 fmt(v.gap) + "," + fmt(v.required) + "\n";
    return r;
}

Result shifts_build(Invocation& in) {
    Cfg c(in.config, "");
    auto o = shift_options(c);
    c.done();
    const auto con = build_shifts(o, "/");
    const auto ws = verify_ws(con);
    Result r;
    r.passed = ws.passed() && con.schedule_report.passed && con.set_certificate.passed;
    r.result = {{"construction", construction_summary_json(con)},
                {"ws", ws_report_json(ws)},
                {"set_certificate", certificate_to_json(con.set_certificate)}};
    r.csv = schedule_csv(con);
    return r;
}

Result shifts_verify(Invocation& in) {
    Cfg c(in.config, "");
    auto o = shift_options(c);
    const double slack = c.get<double>("ws_slack", 1e-12);
    c.done();
    const auto con = build_shifts(o, "/");
    const auto ws = verify_ws(con, slack);
    Result r;
    r.passed = ws.passed() && con.schedule_report.passed && con.set_certificate.passed;
    json per_p = json::array();
    r.csv = "p,n,dist_w,dist_wp,epsilon\n";
    for (int p = 1; p <= con.count; ++p) {
        auto s = orbit_distance_series(con, p);
        long double worst = 0;
        for (const auto& row : s.rows) {
            worst = std::max({worst, row.dist_w, row.dist_wp});
            r.csv += std::to_string(p) + "," + std::to_string(row.n) + "," + fmt(double(row.dist_w)) + "," +
                     fmt(double(row.dist_wp)) + "," + fmt(double(s.epsilon)) + "\n";
        }
        const bool ok = worst <= s.epsilon;
        r.passed = r.passed && ok;
        per_p.push_back({{"p", p},
                         {"epsilon", double(s.epsilon)},
                         {"max_distance", double(worst)},
                         {"rows", s.rows.size()},
                         {"within_epsilon", ok}});
    }
    r.result = {{"ws", ws_report_json(ws)}, {"orbits", per_p}, {"set_certificate", certificate_to_json(con.set_certificate)}};
    return r;
}

Result shifts_orbit(Invocation& in) {
    Cfg c(in.config, "");
    auto o = shift_options(c);
    const int p = c.get<int>("p", 1);
    const bool has_eps = c.has("epsilon");
    const double eps_in = c.get<double>("epsilon", 0.0);
    c.done();
    const auto con = build_shifts(o, "/");
    if (p < 1 || p > con.count) throw ConfigError("/p must lie in 1..count");
    auto s = orbit_distance_series(con, p);
    const double eps = has_eps ? eps_in : 2 * double(s.epsilon);
    const auto visits = simultaneous_visits(con, p, eps);
    const auto dens = density_report(visits, default_checkpoints(con.horizon));
    const auto a_dens = density_report(con.a_sets[p - 1], default_checkpoints(con.horizon));
    Result r;
    std::vector<std::pair<double, double>> pts;
    r.csv = "n,dist_w,dist_wp\n";
    long double worst = 0;
    for (const auto& row : s.rows) {
        worst = std::max({worst, row.dist_w, row.dist_wp});
        r.csv += std::to_string(row.n) + "," + fmt(double(row.dist_w)) + "," + fmt(double(row.dist_wp)) + "\n";
        pts.emplace_back(double(row.n), double(std::max(row.dist_w, row.dist_wp)));
    }
    r.plot = plot_csv("n", "max_distance", pts);
    r.passed = worst <= s.epsilon && dens.lower_estimate >= 0.5 * a_dens.lower_estimate;
    r.result = {{"p", p},
                {"epsilon_bound", double(s.epsilon)},
                {"truncation_bound", double(s.truncation_bound)},
                {"max_distance", double(worst)},
                {"visit_epsilon", eps},
                {"visit_count", visits.size()},
                {"visit_density", density_json(dens)},
                {"a_p_density", density_json(a_dens)}};
    return r;
}

// ---------------------------------------------------------------------------

Result lfm_classify(Invocation& in) {
    Cfg c(in.config, "");
    const MobiusMap m = parse_at("/map", [&] { return MobiusMap::from_json(c.raw("map")); });
    c.done();
    Result r;
    r.result = {{"map", m.to_json()}, {"classification", classification_to_json(classify(m))}};
    return r;
}

Result lfm_iterate(Invocation& in) {
    Cfg c(in.config, "");
    const MobiusMap m = parse_at("/map", [&] { return MobiusMap::from_json(c.raw("map")); });
    const long n = c.get<long>("n", 10);
    std::vector<cplx> pts{0.0, 0.5, cplx(0, 0.5)};
    if (c.has("points")) {
        const json& arr = c.raw("points");
        if (!arr.is_array()) throw ConfigError("/points must be an array");
        pts.clear();
        for (std::size_t i = 0; i < arr.size(); ++i)
            pts.push_back(parse_at("/points/" + std::to_string(i), [&] { return complex_from_json(arr[i]); }));
    }
    c.done();
    const MobiusMap mn = iterate(m, n);
    Result r;
    json vals = json::array();
    r.csv = "re_z,im_z,re_value,im_value\n";
    for (cplx z : pts) {
        try {
            const cplx v = mn(z);
            vals.push_back({{"z", complex_to_json(z)}, {"value", complex_to_json(v)}});
            r.csv += fmt(z.real()) + "," + fmt(z.imag()) + "," + fmt(v.real()) + "," + fmt(v.imag()) + "\n";
        } catch (const PoleError& e) {
            vals.push_back({{"z", complex_to_json(z)}, {"value", nullptr}, {"error", e.what()}});
        }
    }
    r.result = {{"n", n}, {"iterate", mn.to_json()}, {"values", vals}};
    return r;
}

Result lfm_lemma(Invocation& in) {
    Cfg c(in.config, "");
    LemmaParams p;
    if (c.has("map")) p.map = parse_at("/map", [&] { return HalfPlaneMap::from_json(c.raw("map")); });
    p.deltas = c.get("deltas", p.deltas);
    p.index_min = c.get("index_min", p.index_min);
    p.index_max = c.get("index_max", p.index_max);
    p.delta0 = c.get("delta0", p.delta0);
    p.xi_count = c.get("xi_count", p.xi_count);
    p.eta = c.get("eta", p.eta);
    p.radius = c.get("radius", p.radius);
    p.theta = c.get("theta", p.theta);
    p.x_grid = c.get("x_grid", p.x_grid);
    p.boundary_samples = c.get("boundary_samples", p.boundary_samples);
    c.done();
    const auto& ids = lemma_ids();
    if (std::find(ids.begin(), ids.end(), in.argument) == ids.end()) {
        std::string all;
        for (const auto& id : ids) all += (all.empty() ? "" : ", ") + id;
        throw ArgumentError("unknown lemma '" + in.argument + "' (known: " + all + ")");
    }
    const auto rep = geometric_lemma_check(in.argument, p);
    Result r;
    r.passed = rep.passed;
    r.result = check_report_json(rep);
    r.csv = check_report_csv(rep);
    std::vector<std::pair<double, double>> pts;
    for (const auto& row : rep.rows)
        if (!row.params.empty()) pts.emplace_back(row.params.front(), row.ratio);
    r.plot = plot_csv(rep.param_names.empty() ? "index" : rep.param_names.front(), "ratio", pts);
    return r;
}

Result lfm_valiron(Invocation& in) {
    Cfg c(in.config, "");
    const int n_max = c.get("n_max", 40);
    c.done();
    const auto rep = valiron_iterates(n_max);
    Result r;
    r.passed = rep.increasing;
    r.result = valiron_to_json(rep);
    std::vector<std::pair<double, double>> pts;
    for (const auto& row : rep.rows) pts.emplace_back(row.n, double(row.q));
    r.plot = plot_csv("n", "q", pts);
    r.csv = plot_csv("n", "q", pts);
    return r;
}

Result lfm_separation(Invocation& in) {
    Cfg c(in.config, "");
    HalfPlaneMap psi1 = HalfPlaneMap::dilation(2.0, 0.0), psi2 = HalfPlaneMap::valiron();
    if (c.has("psi1")) psi1 = parse_at("/psi1", [&] { return HalfPlaneMap::from_json(c.raw("psi1")); });
    if (c.has("psi2")) psi2 = parse_at("/psi2", [&] { return HalfPlaneMap::from_json(c.raw("psi2")); });
    const int n_max = c.get("n_max", 20);
    const bool table = c.get("include_table", false);
    c.done();
    const auto prof = orbit_separation_profile(psi1, psi2, n_max);
    Result r;
    r.passed = prof.tail_min_nondecreasing;
    r.result = separation_to_json(prof, table);
    std::vector<std::pair<double, double>> pts;
    for (std::size_t N = 0; N < prof.tail_min.size(); ++N) pts.emplace_back(double(N), prof.tail_min[N]);
    r.plot = plot_csv("N", "tail_min", pts);
    r.csv = plot_csv("N", "tail_min", pts);
    return r;
}

// ---------------------------------------------------------------------------

Result hardy_norm(Invocation& in) {
    Cfg c(in.config, "");
    const DiscFunction f = parse_at("/function", [&] { return DiscFunction::from_json(c.raw("function")); });
    const std::string route = c.get<std::string>("route", "all");
    QuadratureGrid grid;
    grid.nodes = c.get("nodes", grid.nodes);
    const double tol = c.get("tolerance", 1e-6);
    c.done();
    std::vector<NormRoute> routes;
    if (route == "all") {
        if (f.is_polynomial()) routes.push_back(NormRoute::coefficient);
        routes.push_back(NormRoute::circle);
        routes.push_back(NormRoute::half_plane);
    } else if (route == "coefficient") {
        routes = {NormRoute::coefficient};
    } else if (route == "circle") {
        routes = {NormRoute::circle};
    } else if (route == "half_plane") {
        routes = {NormRoute::half_plane};
    } else {
        throw ConfigError("/route must be coefficient, circle, half_plane or all");
    }
    Result r;
    json rows = json::array();
    r.csv = "route,value,nodes,replaced_mass\n";
    double lo = INFINITY, hi = 0;
    for (NormRoute rt : routes) {
        const auto res = h2_norm(f, rt, grid);
        lo = std::min(lo, res.value);
        hi = std::max(hi, res.value);
        rows.push_back({{"route", to_string(rt)},
                        {"value", res.value},
                        {"nodes", res.nodes},
                        {"replaced_mass", res.replaced_mass}});
        r.csv += to_string(rt) + "," + fmt(res.value) + "," + std::to_string(res.nodes) + "," + fmt(res.replaced_mass) + "\n";
    }
    const double spread = hi > 0 ? (hi - lo) / hi : 0.0;
    r.passed = spread <= tol;
    r.result = {{"norms", rows}, {"relative_spread", spread}, {"tolerance", tol}};
    return r;
}

Result hardy_sweep_cmd(Invocation& in) {
    const auto& ids = hardy_sweep_ids();
    if (std::find(ids.begin(), ids.end(), in.argument) == ids.end()) {
        std::string all;
        for (const auto& id : ids) all += (all.empty() ? "" : ", ") + id;
        throw ArgumentError("unknown sweep '" + in.argument + "' (known: " + all + ")");
    }
    const auto reps = hardy_sweep(in.argument, in.config);
    Result r;
    json arr = json::array();
    for (const auto& s : reps) {
        arr.push_back(sweep_to_json(s));
        r.passed = r.passed && s.passed;
        r.csv += sweep_csv(s);
        std::vector<std::pair<double, double>> pts;
        for (const auto& row : s.rows) pts.emplace_back(row.x, row.y);
        if (r.plot.empty()) r.plot = plot_csv(s.x_name, s.y_name, pts);
        else
            for (const auto& [x, y] : pts) r.plot += fmt(x) + "," + fmt(y) + "\n";
    }
    r.result = {{"sweeps", arr}};
    return r;
}

// ---------------------------------------------------------------------------

Result criterion_run(Invocation& in) {
    const CriterionConfig cfg = criterion_config(in.config, "");
    Result r;
    json reports = json::array();
    const auto ys = targets_of(cfg);
    for (std::size_t i = 0; i < ys.size(); ++i) {
        const auto rep = check_conditions(cfg, ys[i]);
        reports.push_back(tail_report_json(rep));
        r.passed = r.passed && rep.passed;
        std::istringstream lines(tail_report_csv(rep));
        std::string line;
        bool header = true;
        while (std::getline(lines, line)) {
            if (header) {
                if (i == 0) r.csv += "target," + line + "\n";
                header = false;
                continue;
            }
            r.csv += std::to_string(i + 1) + "," + line + "\n";
        }
    }
    r.result = {{"reports", reports}};
    return r;
}

namespace {

struct Assembled {
    CriterionConfig cfg;
    std::vector<DenseElement> ys;
    Candidate x;
};

Assembled assemble(Cfg& c) {
    Assembled a{criterion_config(c.raw("criterion"), "/criterion"), {}, {}};
    a.ys = targets_of(a.cfg);
    auto fam = index_sets(c, static_cast<int>(a.ys.size()));
    a.x = assemble_candidate(a.cfg, a.ys, fam);
    return a;
}

}  // namespace

Result criterion_assemble(Invocation& in) {
    Cfg c(in.config, "");
    auto a = assemble(c);
    c.done();
    Result r;
    r.passed = !(a.x.norm > a.x.norm_bound * (1 + 1e-9));
    r.result = candidate_json(a.x);
    r.csv = "p,n\n";
    for (const auto& t : a.x.terms) r.csv += std::to_string(t.p) + "," + std::to_string(t.n) + "\n";
    return r;
}

Result criterion_visits(Invocation& in) {
    Cfg c(in.config, "");
    auto a = assemble(c);
    const bool has_eps = c.has("epsilon");
    const double eps_in = c.get("epsilon", 0.0);
    const auto horizon = c.get<std::int64_t>("horizon", 1000);
    c.done();
    const auto* sp = std::get_if<ShiftPair>(&a.cfg.family);
    if (!has_eps && !sp) throw ConfigError("missing key /epsilon");
    Result r;
    json reps = json::array();
    r.csv = "target,N,density\n";
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < a.ys.size(); ++i) {
        const int p = static_cast<int>(i) + 1;
        const double eps = has_eps ? eps_in : 2 * double(epsilon_bound(sp->construction->n_schedule, p));
        const auto v = visit_density_diagnostic(a.cfg, a.x, a.ys[i], eps, horizon);
        json j = visit_report_json(v);
        if (sp) {
            // expected: A_p ∩ [1, horizon] ⊆ visits when ε ≥ ε(p)
            const auto& A = sp->construction->a_sets[i];
            const double eb = double(epsilon_bound(sp->construction->n_schedule, p));
            bool contains = true;
            for (auto n : A.elements())
                if (n <= v.horizon && n <= sp->construction->horizon && !v.visits.contains(n)) contains = false;
            j["contains_a_p"] = contains;
            if (eps >= eb) r.passed = r.passed && contains;
        }
        r.passed = r.passed && v.failures.empty();
        reps.push_back(j);
        for (const auto& [n, q] : v.density.checkpoint_densities) {
            r.csv += std::to_string(p) + "," + std::to_string(n) + "," + fmt(q.get_d()) + "\n";
            if (i == 0) pts.emplace_back(double(n), q.get_d());
        }
    }
    r.plot = plot_csv("N", "density", pts);
    r.result = {{"visits", reps}, {"candidate_norm", std::isnan(a.x.norm) ? json(nullptr) : json(a.x.norm)}};
    return r;
}

Result criterion_obstruction(Invocation& in) {
    Cfg c(in.config, "");
    const double tau = c.get("tau", 1.0);
    const double lambda = c.get("lambda", 2.0);
    const auto horizons = c.get<std::vector<int>>("horizons", {6, 7, 8, 9, 10, 11, 12});
    const double match_tol = c.get("match_tol", 0.2);
    BoundaryFunction F;
    std::string kind = "bump_train";
    if (c.has("function")) {
        Cfg f = c.sub("function");
        kind = f.req<std::string>("kind");
        if (kind == "bump_train") {
            const std::string ret = f.get<std::string>("returns", "even");
            const double mass = f.get("mass", 0.5);
            std::function<bool(std::int64_t)> in_r;
            if (ret == "even") in_r = [](std::int64_t n) { return n >= 1 && n % 2 == 0; };
            else if (ret == "all") in_r = [](std::int64_t n) { return n >= 1; };
            else if (ret == "list") {
                auto els = f.req<std::vector<std::int64_t>>("elements");
                std::sort(els.begin(), els.end());
                in_r = [els](std::int64_t n) { return std::binary_search(els.begin(), els.end(), n); };
            } else {
                throw ConfigError("/function/returns must be even, all or list");
            }
            F = parse_at("/function", [&] { return bump_train(tau, in_r, mass); });
        } else if (kind == "constant") {
            const cplx v = parse_at("/function/value", [&] { return complex_from_json(f.raw("value")); });
            F = [v](double) { return v; };
        } else if (kind == "disc") {
            auto g = std::make_shared<HalfPlaneFunction>(
                parse_at("/function/f", [&] { return DiscFunction::from_json(f.raw("f")); }));
            F = [g](double t) { return (*g)(cplx(0.0, t)); };
        } else {
            throw ConfigError("/function/kind must be bump_train, constant or disc");
        }
        f.done();
    } else {
        F = bump_train(tau, [](std::int64_t n) { return n >= 1 && n % 2 == 0; });
    }
    c.done();
    const auto rep = obstruction_experiment(F, tau, lambda, horizons, match_tol);
    Result r;
    r.passed = !rep.vacuous && rep.consistent && rep.matches;
    r.result = obstruction_json(rep);
    r.result["function_kind"] = kind;
    r.csv = "p,length,integral,eps_critical,packed,returns_inside,eps_count,ratio\n";
    std::vector<std::pair<double, double>> pts;
    for (const auto& row : rep.rows) {
        r.csv += std::to_string(row.p) + "," + fmt(row.length) + "," + fmt(row.integral) + "," + fmt(row.eps_critical) +
                 "," + std::to_string(row.packed) + "," + std::to_string(row.returns_inside) + "," +
                 fmt(row.eps_count) + "," + fmt(row.ratio) + "\n";
        pts.emplace_back(row.length, row.eps_critical);
    }
    r.plot = plot_csv("length", "eps_critical", pts);
    return r;
}

}  // namespace hclab::cli
