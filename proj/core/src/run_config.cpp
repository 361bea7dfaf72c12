#include "cmpslab/run_config.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <json.hpp>
#include <openssl/evp.h>

#include "cmpslab/errors.hpp"

namespace cmpslab {

using nlohmann::json;

std::string to_string(RunMode mode) {
    switch (mode) {
        case RunMode::Single: return "single";
        case RunMode::Coupled: return "coupled";
        case RunMode::SweepDensity: return "sweep-density";
        case RunMode::Luttinger: return "luttinger";
        case RunMode::Bethe: return "bethe";
    }
    return "unknown";
}

namespace {

RunMode mode_from_string(const std::string& name) {
    for (RunMode m : {RunMode::Single, RunMode::Coupled, RunMode::SweepDensity,
                      RunMode::Luttinger, RunMode::Bethe}) {
        if (to_string(m) == name) return m;
    }
    throw ConfigError("mode: unknown mode '" + name +
                      "' (expected single, coupled, sweep-density, luttinger or bethe)");
}

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError(path + ": " + what);
}

std::string join(const std::string& parent, const std::string& key) {
    return parent.empty() ? key : parent + "." + key;
}

void check_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
    if (!obj.is_object()) fail(path.empty() ? "<root>" : path, "expected an object");
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.count(key)) fail(join(path, key), "unknown key");
    }
}

double get_real(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(path, "must be finite");
    return x;
}

long long get_int(const json& v, const std::string& path) {
    if (!v.is_number_integer()) fail(path, "expected an integer");
    return v.get<long long>();
}

double positive(const json& v, const std::string& path) {
    const double x = get_real(v, path);
    if (!(x > 0.0)) fail(path, "must be > 0");
    return x;
}

double nonnegative(const json& v, const std::string& path) {
    const double x = get_real(v, path);
    if (x < 0.0) fail(path, "must be >= 0");
    return x;
}

int int_in(const json& v, const std::string& path, long long lo, long long hi) {
    const long long x = get_int(v, path);
    if (x < lo || x > hi) {
        fail(path, "must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    return static_cast<int>(x);
}

// Accepts a scalar or a non-empty array.
template <class F>
auto scalar_or_list(const json& v, const std::string& path, F each) {
    using T = decltype(each(v, path));
    std::vector<T> out;
    if (v.is_array()) {
        if (v.empty()) fail(path, "must not be empty");
        for (std::size_t i = 0; i < v.size(); ++i) {
            out.push_back(each(v[i], path + "[" + std::to_string(i) + "]"));
        }
    } else {
        out.push_back(each(v, path));
    }
    return out;
}

template <class T>
void require_strictly_increasing(const std::vector<T>& xs, const std::string& path) {
    for (std::size_t i = 1; i < xs.size(); ++i) {
        if (!(xs[i] > xs[i - 1])) fail(path, "values must be strictly increasing");
    }
}

bool coupled_model(const RunConfig& c) {
    return c.mode == RunMode::Coupled || (c.mode == RunMode::Luttinger && c.fields == 2);
}

void parse_model(const json& m, RunConfig& cfg) {
    const bool two = coupled_model(cfg);
    if (two) {
        check_keys(m, "model", {"M", "c", "g", "rho01", "rho02"});
    } else {
        check_keys(m, "model", {"M", "c", "rho0"});
    }
    if (m.contains("M")) cfg.M = positive(m["M"], "model.M");
    if (m.contains("c")) cfg.c = nonnegative(m["c"], "model.c");
    if (two) {
        if (m.contains("g")) cfg.g = nonnegative(m["g"], "model.g");
        if (m.contains("rho01")) cfg.rho01 = positive(m["rho01"], "model.rho01");
        if (m.contains("rho02")) cfg.rho02 = positive(m["rho02"], "model.rho02");
    } else if (m.contains("rho0")) {
        cfg.rho0 = positive(m["rho0"], "model.rho0");
    }
}

void parse_optimizer(const json& o, RunConfig& cfg) {
    check_keys(o, "optimizer",
               {"max_iters", "grad_step", "energy_tol", "constraint_tol", "penalty_init",
                "penalty_growth", "restarts", "max_outer", "warm_restarts"});
    OptimizerConfig& oc = cfg.optimizer;
    if (o.contains("max_iters")) oc.max_iters = int_in(o["max_iters"], "optimizer.max_iters", 1, 1000000);
    if (o.contains("grad_step")) oc.grad_step = positive(o["grad_step"], "optimizer.grad_step");
    if (o.contains("energy_tol")) oc.energy_tol = positive(o["energy_tol"], "optimizer.energy_tol");
    if (o.contains("constraint_tol"))
        oc.constraint_tol = positive(o["constraint_tol"], "optimizer.constraint_tol");
    if (o.contains("penalty_init"))
        oc.penalty_init = positive(o["penalty_init"], "optimizer.penalty_init");
    if (o.contains("penalty_growth")) {
        oc.penalty_growth = get_real(o["penalty_growth"], "optimizer.penalty_growth");
        if (!(oc.penalty_growth > 1.0)) fail("optimizer.penalty_growth", "must be > 1");
    }
    if (o.contains("restarts")) oc.restarts = int_in(o["restarts"], "optimizer.restarts", 1, 10000);
    if (o.contains("max_outer")) oc.max_outer = int_in(o["max_outer"], "optimizer.max_outer", 1, 1000);
    if (o.contains("warm_restarts"))
        cfg.warm_restarts = int_in(o["warm_restarts"], "optimizer.warm_restarts", 1, 10000);
}

std::set<std::string> allowed_top_level(const RunConfig& cfg) {
    std::set<std::string> keys{"mode", "output", "seed"};
    switch (cfg.mode) {
        case RunMode::Bethe:
            keys.insert({"gamma", "bethe_nodes"});
            break;
        case RunMode::Single:
            keys.insert({"model", "D", "gamma", "optimizer", "bethe_nodes"});
            break;
        case RunMode::SweepDensity:
            keys.insert({"model", "D", "gamma", "optimizer", "bethe_nodes", "density_grid"});
            break;
        case RunMode::Coupled:
            keys.insert({"model", "D", "P", "g", "optimizer", "init"});
            break;
        case RunMode::Luttinger:
            keys.insert({"fields", "model", "D", "optimizer", "density_grid"});
            if (cfg.fields == 2) {
                keys.insert({"P", "g", "rho_ref_policy", "init"});
            } else {
                keys.insert({"gamma", "bethe_nodes"});
            }
            break;
    }
    return keys;
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("<root>: invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) fail("<root>", "expected an object");
    if (!doc.contains("mode")) fail("mode", "required key is missing");
    if (!doc["mode"].is_string()) fail("mode", "expected a string");

    RunConfig cfg;
    cfg.mode = mode_from_string(doc["mode"].get<std::string>());
    if (cfg.mode == RunMode::Luttinger && doc.contains("fields")) {
        cfg.fields = int_in(doc["fields"], "fields", 1, 2);
    }
    check_keys(doc, "", allowed_top_level(cfg));

    if (doc.contains("output")) {
        if (!doc["output"].is_string() || doc["output"].get<std::string>().empty()) {
            fail("output", "expected a non-empty string");
        }
        cfg.output = doc["output"].get<std::string>();
    }
    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_unsigned()) fail("seed", "expected a non-negative integer");
        cfg.seed = doc["seed"].get<std::uint64_t>();
    }
    cfg.optimizer.seed = cfg.seed;
    if (doc.contains("model")) parse_model(doc["model"], cfg);
    if (doc.contains("optimizer")) parse_optimizer(doc["optimizer"], cfg);
    if (doc.contains("bethe_nodes")) cfg.bethe_nodes = int_in(doc["bethe_nodes"], "bethe_nodes", 64, 8192);

    const bool needs_D = cfg.mode != RunMode::Bethe;
    if (needs_D) {
        if (!doc.contains("D")) fail("D", "required key is missing");
        cfg.D = scalar_or_list(doc["D"], "D", [](const json& v, const std::string& p) {
            return int_in(v, p, 1, 16);
        });
        require_strictly_increasing(cfg.D, "D");
    }
    if (doc.contains("P")) {
        cfg.P = scalar_or_list(doc["P"], "P", [](const json& v, const std::string& p) {
            return int_in(v, p, 0, 8);
        });
        require_strictly_increasing(cfg.P, "P");
    } else if (coupled_model(cfg)) {
        cfg.P = {2};
    }
    if (doc.contains("gamma")) {
        cfg.gamma = scalar_or_list(doc["gamma"], "gamma", positive);
        require_strictly_increasing(cfg.gamma, "gamma");
    } else if (cfg.mode == RunMode::Bethe) {
        fail("gamma", "required key is missing");
    }
    if (doc.contains("g")) {
        cfg.g_grid = scalar_or_list(doc["g"], "g", nonnegative);
        require_strictly_increasing(cfg.g_grid, "g");
    } else if (coupled_model(cfg)) {
        cfg.g_grid = {cfg.g};
    }
    if (doc.contains("density_grid")) {
        const json& dg = doc["density_grid"];
        check_keys(dg, "density_grid", {"span", "nodes"});
        if (dg.contains("span")) {
            cfg.density_grid.span = positive(dg["span"], "density_grid.span");
            if (!(cfg.density_grid.span < 1.0)) fail("density_grid.span", "must be < 1");
        }
        if (dg.contains("nodes")) cfg.density_grid.nodes = int_in(dg["nodes"], "density_grid.nodes", 3, 101);
    }
    if (cfg.mode == RunMode::Luttinger && cfg.density_grid.nodes < 9) {
        fail("density_grid.nodes", "luttinger extraction needs at least 9 nodes");
    }
    if (doc.contains("rho_ref_policy")) {
        if (!doc["rho_ref_policy"].is_string()) fail("rho_ref_policy", "expected a string");
        try {
            cfg.rho_ref_policy = rho_ref_policy_from_string(doc["rho_ref_policy"].get<std::string>());
        } catch (const InvalidParams& e) {
            fail("rho_ref_policy", e.what());
        }
    }
    if (doc.contains("init")) {
        if (!doc["init"].is_string()) fail("init", "expected a string");
        const std::string init = doc["init"].get<std::string>();
        if (init == "single") {
            cfg.coupled_single_init = true;
        } else if (init != "random") {
            fail("init", "expected 'random' or 'single'");
        }
    }
    if (cfg.mode == RunMode::Luttinger && cfg.fields == 2 &&
        std::abs(cfg.rho01 - cfg.rho02) > 1e-12 * std::max(cfg.rho01, cfg.rho02)) {
        fail("model.rho02", "coupled luttinger extraction needs rho01 == rho02");
    }
    const bool single_field_c =
        cfg.mode == RunMode::Single || cfg.mode == RunMode::SweepDensity ||
        (cfg.mode == RunMode::Luttinger && cfg.fields == 1);
    if (single_field_c && cfg.gamma.empty() && !(cfg.c > 0.0) && cfg.mode != RunMode::Single) {
        fail("model.c", "density sweeps need c > 0 (or a gamma list)");
    }
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(path.string() + ": cannot open config file");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str());
}

std::string canonical_json(const RunConfig& cfg) {
    json doc;
    doc["mode"] = to_string(cfg.mode);
    doc["seed"] = cfg.seed;
    const bool two = coupled_model(cfg);
    if (cfg.mode != RunMode::Bethe) {
        json model{{"M", cfg.M}, {"c", cfg.c}};
        if (two) {
            model["g"] = cfg.g;
            model["rho01"] = cfg.rho01;
            model["rho02"] = cfg.rho02;
        } else {
            model["rho0"] = cfg.rho0;
        }
        doc["model"] = model;
        doc["D"] = cfg.D;
        const OptimizerConfig& o = cfg.optimizer;
        doc["optimizer"] = {{"max_iters", o.max_iters},
                            {"grad_step", o.grad_step},
                            {"energy_tol", o.energy_tol},
                            {"constraint_tol", o.constraint_tol},
                            {"penalty_init", o.penalty_init},
                            {"penalty_growth", o.penalty_growth},
                            {"restarts", o.restarts},
                            {"max_outer", o.max_outer},
                            {"warm_restarts", cfg.warm_restarts}};
    }
    if (cfg.mode == RunMode::Luttinger) doc["fields"] = cfg.fields;
    if (two) {
        doc["P"] = cfg.P;
        doc["g"] = cfg.g_grid;
        doc["init"] = cfg.coupled_single_init ? "single" : "random";
        if (cfg.mode == RunMode::Luttinger) doc["rho_ref_policy"] = to_string(cfg.rho_ref_policy);
    } else {
        if (!cfg.gamma.empty()) doc["gamma"] = cfg.gamma;
        if (cfg.mode != RunMode::Coupled) doc["bethe_nodes"] = cfg.bethe_nodes;
    }
    if (cfg.mode == RunMode::SweepDensity || cfg.mode == RunMode::Luttinger) {
        doc["density_grid"] = {{"span", cfg.density_grid.span}, {"nodes", cfg.density_grid.nodes}};
    }
    return doc.dump(2) + "\n";
}

std::string git_blob_hash(const std::string& content) {
    const std::string blob = "blob " + std::to_string(content.size()) + '\0' + content;
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(blob.data(), blob.size(), digest, &len, EVP_sha1(), nullptr) != 1) {
        throw RunError("sha1 digest failed");
    }
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) {
        hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    }
    return hex.str();
}

}  // namespace cmpslab
