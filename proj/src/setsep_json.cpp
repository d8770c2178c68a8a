#include <cmath>

#include "hclab/errors.hpp"
#include "hclab/setsep.hpp"

namespace hclab {

using ojson = nlohmann::ordered_json;

nlohmann::json certificate_to_json(const Certificate& c) {
    ojson j;
    j["mode"] = to_string(c.mode);
    j["passed"] = c.passed;
    j["subset_ok"] = c.subset_ok;
    j["thresholds_ok"] = c.thresholds_ok;
    j["disjoint_ok"] = c.disjoint_ok;
    j["separation_ok"] = c.separation_ok;
    j["values_checked"] = c.values_checked;
    j["pairs_compared"] = c.pairs_compared;
    j["unverifiable"] = c.unverifiable;
    j["min_slack"] = c.min_slack;
    j["violation_count"] = c.violation_count;
    auto vs = ojson::array();
    for (const auto& v : c.violations)
        vs.push_back({{"set_a", v.set_a}, {"fn_a", v.fn_a}, {"n", v.n}, {"set_b", v.set_b},
                      {"fn_b", v.fn_b}, {"m", v.m}, {"gap", v.gap}, {"required", v.required}});
    j["violations"] = vs;
    j["facts"] = c.facts;
    return nlohmann::json::parse(j.dump());
}

nlohmann::json family_to_json(const SeparatedFamily& f) {
    ojson j;
    j["mode"] = to_string(f.mode);
    j["horizon"] = f.horizon;
    auto fns = ojson::array();
    for (const auto& fn : f.functions) fns.push_back(ojson::parse(fn.to_json().dump()));
    j["functions"] = fns;
    j["thresholds"] = f.thresholds;
    j["radii"] = f.radii;
    j["entry_thresholds"] = f.entry_thresholds;
    if (!f.complex_pairs.empty()) {
        auto cp = ojson::array();
        for (const auto& [a, b] : f.complex_pairs)
            cp.push_back({{"a", {a.real(), a.imag()}}, {"b", {b.real(), b.imag()}}});
        j["complex_pairs"] = cp;
        j["projection"] = f.projection == 0 ? "real" : "imag";
    }
    auto sets = ojson::array();
    for (const auto& s : f.sets) sets.push_back(s.elements());
    j["sets"] = sets;
    auto bases = ojson::array();
    for (const auto& s : f.base_sets) bases.push_back(s.elements());
    j["base_sets"] = bases;
    j["floors"] = f.floors;
    j["asymptotic_floors"] = f.asymptotic_floors;
    j["nominal_floors"] = f.nominal_floors;
    auto dens = ojson::array();
    for (std::size_t k = 0; k < f.sets.size(); ++k) {
        ojson d;
        d["size"] = f.sets[k].size();
        d["prefix_density"] = f.sets[k].size() / double(f.horizon);
        if (k < f.density_reports.size()) {
            d["lower_estimate"] = f.density_reports[k].lower_estimate;
            d["upper_estimate"] = f.density_reports[k].upper_estimate;
        }
        dens.push_back(d);
    }
    j["densities"] = dens;
    j["notes"] = f.notes;
    j["certificate"] = ojson::parse(certificate_to_json(f.certificate).dump());
    return nlohmann::json::parse(j.dump());
}

namespace {
template <class T>
std::vector<T> vec_of(const nlohmann::json& j, const char* key) {
    if (!j.contains(key)) return {};
    if (!j[key].is_array()) throw ArgumentError(std::string("'") + key + "' must be an array");
    return j[key].get<std::vector<T>>();
}
}  // namespace

SeparatedFamily family_from_json(const nlohmann::json& j) {
    static const char* allowed[] = {"mode", "horizon", "functions", "thresholds", "radii",
                                    "entry_thresholds", "complex_pairs", "projection", "sets",
                                    "base_sets", "floors", "asymptotic_floors", "nominal_floors", "densities", "notes",
                                    "certificate"};
    if (!j.is_object()) throw ArgumentError("family must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (auto a : allowed) ok = ok || it.key() == a;
        if (!ok) throw ArgumentError("unknown key '/" + it.key() + "' in family");
    }
    for (auto req : {"mode", "horizon", "functions", "thresholds", "sets"})
        if (!j.contains(req)) throw ArgumentError(std::string("missing key '/") + req + "'");
    SeparatedFamily f;
    try {
        f.mode = separation_mode_from_string(j["mode"].get<std::string>());
        f.horizon = j["horizon"].get<std::int64_t>();
        for (const auto& fn : j["functions"]) f.functions.push_back(FunctionSpec::from_json(fn));
        f.thresholds = vec_of<std::int64_t>(j, "thresholds");
        f.radii = vec_of<std::int64_t>(j, "radii");
        f.entry_thresholds = vec_of<std::int64_t>(j, "entry_thresholds");
        for (const auto& s : j["sets"]) f.sets.emplace_back(s.get<std::vector<std::int64_t>>(), f.horizon);
        if (j.contains("base_sets"))
            for (const auto& s : j["base_sets"]) f.base_sets.emplace_back(s.get<std::vector<std::int64_t>>(), f.horizon);
        f.floors = vec_of<double>(j, "floors");
        f.asymptotic_floors = vec_of<double>(j, "asymptotic_floors");
        f.nominal_floors = vec_of<double>(j, "nominal_floors");
        f.notes = vec_of<std::string>(j, "notes");
        if (j.contains("complex_pairs")) {
            for (const auto& p : j["complex_pairs"]) {
                auto a = p.at("a").get<std::vector<double>>();
                auto b = p.at("b").get<std::vector<double>>();
                if (a.size() != 2 || b.size() != 2) throw ArgumentError("complex pair entries must be [re, im]");
                f.complex_pairs.emplace_back(std::complex<double>(a[0], a[1]), std::complex<double>(b[0], b[1]));
            }
            f.projection = j.value("projection", std::string("real")) == "imag" ? 1 : 0;
        }
    } catch (const nlohmann::json::exception& e) {
        throw ArgumentError(std::string("malformed family: ") + e.what());
    }
    return f;
}

}  // namespace hclab
