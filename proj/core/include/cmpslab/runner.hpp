#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cmpslab/csv.hpp"
#include "cmpslab/run_config.hpp"

namespace cmpslab {

enum class PointKind { Bethe, Single, Coupled };

/// One unit of work. Points form chains; inside a chain each point may warm-start from
/// an earlier one (`warm_from`, an index into the plan).
struct PointSpec {
    std::size_t index{};
    std::string id;     // file stem under points/
    std::string label;  // e.g. "D=4 gamma=2"
    PointKind kind{PointKind::Single};
    std::size_t chain{};
    std::optional<std::size_t> warm_from;
    bool rescale_warm_start{false};  // single-field density sweeps
    int D{};
    int P{};
    double gamma{};  // NaN when the point is not labelled by a coupling
    double g{};
    double c{};
    double M{};
    double rho1{};
    double rho2{};
    std::uint64_t seed{};
};

struct RunPlan {
    std::vector<PointSpec> points;
    std::vector<std::vector<std::size_t>> chains;  // execution order per chain
};

RunPlan plan_run(const RunConfig& config);

struct RunOptions {
    int jobs{1};
};

struct RunSummary {
    std::filesystem::path dir;
    std::size_t computed{};
    std::size_t skipped{};
    std::vector<std::string> failed;  // point ids (or extraction rows) that failed

    bool ok() const noexcept { return failed.empty(); }
};

/// Runs into config.output. An existing directory is continued when its config hash
/// matches and rejected with RunError otherwise.
RunSummary run(const RunConfig& config, const RunOptions& options = {});

/// Recomputes the points missing from dir/points and rewrites the tables.
/// Throws RunError when dir/config.json no longer matches the recorded hash.
RunSummary resume(const std::filesystem::path& dir, const RunOptions& options = {});

/// Writes tidy (x, y, series) tables under dir/report and returns their paths.
/// Throws RunError listing every missing input.
std::vector<std::filesystem::path> report(const std::filesystem::path& dir);

/// Schema of every table the runner and report emit, keyed by file name.
std::vector<CsvColumn> output_schema(const std::string& file_name);

/// Bethe table for `cmpslab bethe`: gamma, e, lambda, residual, quad_nodes.
CsvTable bethe_table(const std::vector<double>& gammas, int n_nodes);

}  // namespace cmpslab
