#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include <CLI11.hpp>

#include "cli.hpp"

namespace fs = std::filesystem;
using namespace hclab;
using namespace hclab::cli;

namespace {

constexpr int kSchemaVersion = 1;

struct Command {
    Handler run;
    Overrides over;
};

std::string utc_stamp() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
    return buf;
}

json read_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file '" + path + "'");
    try {
        return json::parse(f);
    } catch (const json::parse_error& e) {
        throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + p.string() + "'");
    f << text;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hclab: batch experiments on integer-set separation, weighted shifts, linear-fractional maps, "
                 "Hardy-space estimates and the disjoint frequent hypercyclicity criterion"};
    std::string config_path, out_dir = ".";
    std::optional<std::int64_t> horizon;
    std::optional<double> tol;
    std::uint64_t seed = 0;
    int jobs = 1;
    std::string argument;

    const std::map<std::string, std::map<std::string, Command>> table{
        {"sets", {{"build", {sets_build, {"/horizon", ""}}}, {"verify", {sets_verify, {"", ""}}}}},
        {"shifts",
         {{"build", {shifts_build, {"/horizon", ""}}},
          {"verify", {shifts_verify, {"/horizon", "/ws_slack"}}},
          {"orbit", {shifts_orbit, {"/horizon", ""}}}}},
        {"lfm",
         {{"classify", {lfm_classify, {"", ""}}},
          {"iterate", {lfm_iterate, {"", ""}}},
          {"lemma", {lfm_lemma, {"", ""}}},
          {"valiron", {lfm_valiron, {"", ""}}},
          {"separation", {lfm_separation, {"", ""}}}}},
        {"hardy", {{"norm", {hardy_norm, {"", "/tolerance"}}}, {"sweep", {hardy_sweep_cmd, {"", ""}}}}},
        {"criterion",
         {{"run", {criterion_run, {"/horizon", "/tolerance"}}},
          {"assemble", {criterion_assemble, {"/criterion/horizon", "/criterion/tolerance"}}},
          {"visits", {criterion_visits, {"/horizon", "/criterion/tolerance"}}},
          {"obstruction", {criterion_obstruction, {"", "/match_tol"}}}}},
    };

    std::string chosen_group, chosen_action;
    for (const auto& [group, actions] : table) {
        auto* g = app.add_subcommand(group, group + " commands");
        g->require_subcommand(1);
        for (const auto& [action, cmd] : actions) {
            auto* s = g->add_subcommand(action, group + " " + action);
            s->add_option("--config", config_path, "JSON config file");
            s->add_option("--out", out_dir, "output directory");
            s->add_option("--horizon", horizon, "horizon override");
            s->add_option("--tol", tol, "tolerance override");
            s->add_option("--seed", seed, "random seed (recorded; no command samples randomly)");
            s->add_option("--jobs", jobs, "worker count (recorded; evaluation is sequential)");
            if (action == "lemma" || action == "sweep") s->add_option("id", argument, "lemma id")->required();
            s->callback([&chosen_group, &chosen_action, group = group, action = action] {
                chosen_group = group;
                chosen_action = action;
            });
        }
    }
    app.require_subcommand(1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        const Command& cmd = table.at(chosen_group).at(chosen_action);
        Invocation in;
        in.group = chosen_group;
        in.action = chosen_action;
        in.argument = argument;
        in.config = read_config(config_path);
        if (!in.config.is_object()) throw ConfigError("/ must be an object");
        auto apply = [&](const std::string& ptr, const json& v, const char* flag) {
            if (ptr.empty()) {
                in.notes.push_back(std::string(flag) + " has no effect on this command");
                return;
            }
            in.config[json::json_pointer(ptr)] = v;
        };
        if (horizon) apply(cmd.over.horizon, *horizon, "--horizon");
        if (tol) apply(cmd.over.tolerance, *tol, "--tol");
        if (jobs < 1) throw ConfigError("--jobs must be ≥ 1");

        const json effective = in.config;
        Result r = cmd.run(in);

        json report = {{"schema_version", kSchemaVersion},
                       {"command", chosen_group + " " + chosen_action + (argument.empty() ? "" : " " + argument)},
                       {"config", effective},
                       {"seed", seed},
                       {"passed", r.passed},
                       {"result", r.result},
                       {"notes", in.notes}};

        fs::create_directories(out_dir);
        std::string base = chosen_group + "_" + chosen_action + (argument.empty() ? "" : "_" + argument) + "_" + utc_stamp();
        fs::path json_path = fs::path(out_dir) / (base + ".json");
        for (int k = 1; fs::exists(json_path); ++k) json_path = fs::path(out_dir) / (base + "-" + std::to_string(k) + ".json");
        const std::string stem = json_path.stem().string();
        write_file(json_path, report.dump(2) + "\n");
        std::cout << "report " << json_path.string() << "\n";
        if (!r.csv.empty()) {
            const auto p = fs::path(out_dir) / (stem + ".csv");
            write_file(p, r.csv);
            std::cout << "table " << p.string() << "\n";
        }
        if (!r.plot.empty()) {
            const auto p = fs::path(out_dir) / (stem + ".plot.csv");
            write_file(p, r.plot);
            std::cout << "plot " << p.string() << "\n";
        }
        std::cout << (r.passed ? "PASS" : "FAIL") << "\n";
        return r.passed ? 0 : 2;
    } catch (const Error& e) {
        std::cerr << "error [" << e.kind() << "]: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
