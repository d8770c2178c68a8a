#pragma once

#include <functional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "hclab/errors.hpp"

namespace hclab::cli {

using nlohmann::json;

// Reads one JSON object, records every key it touches, and rejects the rest.
class Cfg {
public:
    Cfg(const json& j, std::string pointer);

    bool has(const std::string& key) const;
    const json& raw(const std::string& key);
    Cfg sub(const std::string& key);

    template <class T>
    T get(const std::string& key, T fallback) {
        if (!has(key)) return fallback;
        return as<T>(key);
    }
    template <class T>
    T req(const std::string& key) {
        if (!has(key)) throw ConfigError("missing key " + at(key));
        return as<T>(key);
    }
    std::string at(const std::string& key) const { return pointer_ + "/" + key; }
    const std::string& pointer() const { return pointer_; }
    // Throws ConfigError naming the first key that was never read.
    void done() const;

private:
    const json& j_;
    std::string pointer_;
    std::set<std::string> used_;

    template <class T>
    T as(const std::string& key) {
        used_.insert(key);
        try {
            return j_.at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError("wrong type at " + at(key));
        }
    }
};

// Runs a library parser and rewrites its errors as ConfigError at `pointer`.
template <class F>
auto parse_at(const std::string& pointer, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ConfigError& e) {
        throw ConfigError(pointer + ": " + e.what());
    } catch (const Error& e) {
        throw ConfigError(pointer + ": " + e.what());
    } catch (const json::exception& e) {
        throw ConfigError(pointer + ": " + e.what());
    }
}

struct Result {
    json result;
    bool passed = true;
    std::string csv;   // tables, empty when none
    std::string plot;  // x,y plot data, empty when no sweep
};

struct Invocation {
    std::string group, action, argument;
    json config = json::object();
    std::vector<std::string> notes;
};

using Handler = std::function<Result(Invocation&)>;

// Keys of each command that --horizon and --tol override (JSON pointers, "" when unsupported).
struct Overrides {
    std::string horizon, tolerance;
};

Result sets_build(Invocation& in);
Result sets_verify(Invocation& in);
Result shifts_build(Invocation& in);
Result shifts_verify(Invocation& in);
Result shifts_orbit(Invocation& in);
Result lfm_classify(Invocation& in);
Result lfm_iterate(Invocation& in);
Result lfm_lemma(Invocation& in);
Result lfm_valiron(Invocation& in);
Result lfm_separation(Invocation& in);
Result hardy_norm(Invocation& in);
Result hardy_sweep_cmd(Invocation& in);
Result criterion_run(Invocation& in);
Result criterion_assemble(Invocation& in);
Result criterion_visits(Invocation& in);
Result criterion_obstruction(Invocation& in);

}  // namespace hclab::cli
