#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cmpslab/luttinger.hpp"
#include "cmpslab/variational.hpp"

namespace cmpslab {

enum class RunMode { Single, Coupled, SweepDensity, Luttinger, Bethe };
std::string to_string(RunMode mode);

struct DensityGridConfig {
    double span{0.15};
    int nodes{11};
};

/// Validated run configuration. See docs/config.schema.json for the JSON layout.
struct RunConfig {
    RunMode mode{RunMode::Single};
    std::filesystem::path output{"cmpslab-run"};
    std::uint64_t seed{1};

    // model
    double M{0.5};
    double c{1.0};
    double rho0{1.0};
    double g{0.0};
    double rho01{0.63};
    double rho02{0.63};

    std::vector<int> D;              // bond dimensions
    std::vector<int> P;              // coupling pairs (coupled models)
    std::vector<double> gamma;       // single-field couplings; c = gamma rho0 / (2M)
    std::vector<double> g_grid;      // interspecies couplings (coupled models)
    int fields{1};                   // luttinger mode: 1 or 2 species
    DensityGridConfig density_grid;
    RhoRefPolicy rho_ref_policy{RhoRefPolicy::Total};
    int bethe_nodes{256};

    OptimizerConfig optimizer;
    int warm_restarts{1};  // restarts for warm-started points (the warm start counts as one)

    /// Coupled chains: start each chain head from the two single-field optima.
    bool coupled_single_init{false};
};

/// Throws ConfigError with the JSON key path of the first problem. Unknown keys, keys the
/// mode does not use, wrong types and out-of-range values are all rejected.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Canonical JSON (sorted keys, every field explicit); hashing input and config snapshot.
std::string canonical_json(const RunConfig& config);

/// Git blob hash: sha1("blob <len>\0" + content) as lowercase hex.
std::string git_blob_hash(const std::string& content);

}  // namespace cmpslab
