#include "cmpslab/runner.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "cmpslab/bethe.hpp"
#include "cmpslab/errors.hpp"
#include "cmpslab/luttinger.hpp"
#include "cmpslab/version.hpp"

namespace cmpslab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::string fmt_label(double x) {
    std::ostringstream s;
    s << x;
    return s.str();
}

bool coupled_model(const RunConfig& c) {
    return c.mode == RunMode::Coupled || (c.mode == RunMode::Luttinger && c.fields == 2);
}

// Couplings labelling the single-field chains: the gamma list, or the bare c.
std::vector<std::pair<double, double>> gamma_c_pairs(const RunConfig& cfg) {
    std::vector<std::pair<double, double>> out;
    if (cfg.gamma.empty()) {
        out.emplace_back(lieb_liniger_gamma(cfg.M, cfg.c, cfg.rho0), cfg.c);
    } else {
        for (double gamma : cfg.gamma) out.emplace_back(gamma, gamma * cfg.rho0 / (2.0 * cfg.M));
    }
    return out;
}

}  // namespace

RunPlan plan_run(const RunConfig& cfg) {
    RunPlan plan;
    auto add = [&](PointSpec p) {
        p.index = plan.points.size();
        char id[32];
        std::snprintf(id, sizeof id, "p%05zu", p.index);
        p.id = id;
        p.seed = splitmix64(cfg.seed ^ splitmix64(p.index));
        plan.points.push_back(p);
        return p.index;
    };
    auto new_chain = [&] {
        plan.chains.emplace_back();
        return plan.chains.size() - 1;
    };

    switch (cfg.mode) {
        case RunMode::Bethe:
            for (double gamma : cfg.gamma) {
                PointSpec p;
                p.kind = PointKind::Bethe;
                p.gamma = gamma;
                p.label = "gamma=" + fmt_label(gamma);
                p.chain = new_chain();
                plan.chains[p.chain].push_back(add(p));
            }
            break;

        case RunMode::Single:
            for (int D : cfg.D) {
                for (auto [gamma, c] : gamma_c_pairs(cfg)) {
                    PointSpec p;
                    p.kind = PointKind::Single;
                    p.D = D;
                    p.gamma = gamma;
                    p.c = c;
                    p.M = cfg.M;
                    p.rho1 = cfg.rho0;
                    p.label = "D=" + std::to_string(D) + " gamma=" + fmt_label(gamma);
                    p.chain = new_chain();
                    plan.chains[p.chain].push_back(add(p));
                }
            }
            break;

        case RunMode::SweepDensity:
        case RunMode::Luttinger:
            if (!coupled_model(cfg)) {
                const auto grid = density_grid(cfg.rho0, cfg.density_grid.span, cfg.density_grid.nodes);
                for (int D : cfg.D) {
                    for (auto [gamma, c] : gamma_c_pairs(cfg)) {
                        const std::size_t chain = new_chain();
                        const std::size_t first = plan.points.size();
                        for (double rho : grid) {
                            PointSpec p;
                            p.kind = PointKind::Single;
                            p.D = D;
                            p.gamma = gamma;
                            p.c = c;
                            p.M = cfg.M;
                            p.rho1 = rho;
                            p.chain = chain;
                            p.rescale_warm_start = true;
                            p.label = "D=" + std::to_string(D) + " gamma=" + fmt_label(gamma) +
                                      " rho=" + fmt_label(rho);
                            add(p);
                        }
                        for (const SweepStep& step : sweep_order(grid, cfg.rho0)) {
                            PointSpec& p = plan.points[first + step.index];
                            if (step.warm_from) p.warm_from = first + *step.warm_from;
                            plan.chains[chain].push_back(p.index);
                        }
                    }
                }
                break;
            }
            {
                const auto g1 = density_grid(cfg.rho01, cfg.density_grid.span, cfg.density_grid.nodes);
                const auto g2 = density_grid(cfg.rho02, cfg.density_grid.span, cfg.density_grid.nodes);
                const std::size_t mid = g1.size() / 2;
                for (int D : cfg.D) {
                    for (int P : cfg.P) {
                        for (double g : cfg.g_grid) {
                            const std::size_t chain = new_chain();
                            const std::size_t first = plan.points.size();
                            for (double r1 : g1) {
                                for (double r2 : g2) {
                                    PointSpec p;
                                    p.kind = PointKind::Coupled;
                                    p.D = D;
                                    p.P = P;
                                    p.g = g;
                                    p.c = cfg.c;
                                    p.M = cfg.M;
                                    p.rho1 = r1;
                                    p.rho2 = r2;
                                    p.gamma = kNaN;
                                    p.chain = chain;
                                    p.label = "D=" + std::to_string(D) + " P=" + std::to_string(P) +
                                              " g=" + fmt_label(g) + " rho1=" + fmt_label(r1) +
                                              " rho2=" + fmt_label(r2);
                                    add(p);
                                }
                            }
                            for (const SweepStep& step : sweep_order_2d(g1.size(), g2.size(), mid, mid)) {
                                PointSpec& p = plan.points[first + step.index];
                                if (step.warm_from) p.warm_from = first + *step.warm_from;
                                plan.chains[chain].push_back(p.index);
                            }
                        }
                    }
                }
            }
            break;

        case RunMode::Coupled:
            for (int D : cfg.D) {
                for (int P : cfg.P) {
                    const std::size_t chain = new_chain();
                    std::optional<std::size_t> prev;
                    for (double g : cfg.g_grid) {
                        PointSpec p;
                        p.kind = PointKind::Coupled;
                        p.D = D;
                        p.P = P;
                        p.g = g;
                        p.c = cfg.c;
                        p.M = cfg.M;
                        p.rho1 = cfg.rho01;
                        p.rho2 = cfg.rho02;
                        p.gamma = kNaN;
                        p.chain = chain;
                        p.warm_from = prev;
                        p.label = "D=" + std::to_string(D) + " P=" + std::to_string(P) +
                                  " g=" + fmt_label(g);
                        prev = add(p);
                        plan.chains[chain].push_back(*prev);
                    }
                }
            }
            break;
    }
    return plan;
}

namespace {

json real_json(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

double json_real(const json& v, double null_value) {
    return v.is_null() ? null_value : v.get<double>();
}

json spec_json(const PointSpec& p) {
    json j{{"id", p.id}, {"label", p.label}, {"seed", p.seed}};
    switch (p.kind) {
        case PointKind::Bethe:
            j["kind"] = "bethe";
            j["gamma"] = p.gamma;
            break;
        case PointKind::Single:
            j["kind"] = "single";
            j["D"] = p.D;
            j["gamma"] = real_json(p.gamma);
            j["c"] = p.c;
            j["M"] = p.M;
            j["rho0"] = p.rho1;
            break;
        case PointKind::Coupled:
            j["kind"] = "coupled";
            j["D"] = p.D;
            j["P"] = p.P;
            j["g"] = p.g;
            j["c"] = p.c;
            j["M"] = p.M;
            j["rho01"] = p.rho1;
            j["rho02"] = p.rho2;
            break;
    }
    return j;
}

json result_json(const PointSpec& p, const OptimResult& r, const std::optional<std::string>& warm) {
    json j = spec_json(p);
    j["warm_from"] = warm ? json(*warm) : json(nullptr);
    j["energy"] = r.energy;
    j["densities"] = r.densities;
    j["constraint_residuals"] = r.constraint_residuals;
    j["iterations"] = r.iterations;
    j["converged"] = r.converged;
    j["gap"] = real_json(r.gap);
    j["correlation"] = r.correlation;
    j["restart"] = r.restart;
    j["params"] = std::vector<double>(r.params.values.data(),
                                      r.params.values.data() + r.params.values.size());
    return j;
}

ParamVector params_from_json(const json& j, const PointSpec& p) {
    const auto values = j.at("params").get<std::vector<double>>();
    ParamVector v;
    v.layout = p.kind == PointKind::Coupled
                   ? ParamLayout::two_field(p.D, static_cast<std::size_t>(p.P))
                   : ParamLayout::single(p.D);
    v.values = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
    if (v.values.size() != v.layout.size()) {
        throw RunError("point " + p.id + ": stored parameter vector has the wrong length");
    }
    return v;
}

fs::path point_path(const fs::path& dir, const PointSpec& p) {
    return dir / "points" / (p.id + ".json");
}

std::optional<json> load_point(const fs::path& dir, const PointSpec& p) {
    const fs::path path = point_path(dir, p);
    if (!fs::exists(path)) return std::nullopt;
    try {
        json j = json::parse(read_file(path));
        if (j.value("id", "") != p.id) {
            throw RunError(path.string() + ": id does not match the plan");
        }
        return j;
    } catch (const json::exception& e) {
        spdlog::warn("ignoring unreadable point file {}: {}", path.string(), e.what());
        return std::nullopt;
    }
}

void write_json(const fs::path& path, const json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

json compute_point(const RunConfig& cfg, const PointSpec& p, const std::optional<json>& warm,
                   const std::optional<PointSpec>& warm_spec) {
    if (p.kind == PointKind::Bethe) {
        const BetheSolution s = solve_bethe(p.gamma, cfg.bethe_nodes);
        json j = spec_json(p);
        j["e"] = s.e_dimensionless;
        j["lambda"] = s.lambda;
        j["residual"] = s.residual;
        j["quad_nodes"] = s.quad_nodes;
        j["converged"] = true;
        return j;
    }

    OptimizerConfig oc = cfg.optimizer;
    oc.seed = p.seed;
    std::optional<ParamVector> init;
    std::optional<std::string> warm_id;
    if (warm && warm_spec) {
        ParamVector v = params_from_json(*warm, *warm_spec);
        if (p.rescale_warm_start) {
            const double n = warm->at("densities").at(0).get<double>();
            v = pack(unpack_single(v).rescaled(p.rho1 / n));
        }
        init = std::move(v);
        oc.restarts = cfg.warm_restarts;
        warm_id = warm_spec->id;
    }

    OptimResult r;
    if (p.kind == PointKind::Single) {
        r = minimize_single(ModelParams{p.M, p.c, p.rho1}, p.D, oc, init);
    } else {
        const CoupledModelParams mp{p.M, p.c, p.g, p.rho1, p.rho2};
        if (!init && cfg.coupled_single_init) {
            const OptimResult s1 = minimize_single(mp.species(1), p.D, oc);
            const OptimResult s2 = p.rho1 == p.rho2 ? s1 : minimize_single(mp.species(2), p.D, oc);
            init = warm_start_coupled(s1, s2, static_cast<std::size_t>(p.P), p.seed);
        }
        r = minimize_coupled(mp, p.D, static_cast<std::size_t>(p.P), oc, init);
    }
    return result_json(p, r, warm_id);
}

struct ChainOutcome {
    std::size_t computed{};
    std::size_t skipped{};
    std::vector<std::string> failed;
    std::map<std::string, double> seconds;
};

ChainOutcome run_chain(const RunConfig& cfg, const RunPlan& plan, const std::vector<std::size_t>& chain,
                       const fs::path& dir) {
    ChainOutcome out;
    std::map<std::size_t, json> done;
    for (std::size_t idx : chain) {
        const PointSpec& p = plan.points[idx];
        if (auto existing = load_point(dir, p)) {
            done[idx] = std::move(*existing);
            ++out.skipped;
            continue;
        }
        std::optional<json> warm;
        std::optional<PointSpec> warm_spec;
        if (p.warm_from) {
            auto it = done.find(*p.warm_from);
            if (it != done.end()) {
                warm = it->second;
                warm_spec = plan.points[*p.warm_from];
            }
        }
        const auto t0 = std::chrono::steady_clock::now();
        try {
            json j = compute_point(cfg, p, warm, warm_spec);
            write_json(point_path(dir, p), j);
            if (!j.at("converged").get<bool>()) out.failed.push_back(p.id);
            spdlog::info("{} [{}] done", p.id, p.label);
            done[idx] = std::move(j);
        } catch (const Error& e) {
            spdlog::error("{} [{}] failed: {}", p.id, p.label, e.what());
            out.failed.push_back(p.id);
        }
        out.seconds[p.id] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        ++out.computed;
    }
    return out;
}

// ---- tables ---------------------------------------------------------------

const std::map<std::string, std::vector<CsvColumn>>& schemas() {
    using T = CsvType;
    static const std::map<std::string, std::vector<CsvColumn>> s{
        {"bethe.csv",
         {{"gamma", T::Real}, {"e", T::Real}, {"lambda", T::Real}, {"residual", T::Real},
          {"quad_nodes", T::Integer}}},
        {"results_single.csv",
         {{"id", T::Text}, {"D", T::Integer}, {"gamma", T::Real}, {"c", T::Real}, {"M", T::Real},
          {"rho0", T::Real}, {"energy", T::Real}, {"density", T::Real},
          {"constraint_residual", T::Real}, {"gap", T::Real}, {"iterations", T::Integer},
          {"converged", T::Bool}, {"restart", T::Integer}, {"bethe_energy", T::Real},
          {"rel_error", T::Real}}},
        {"results_coupled.csv",
         {{"id", T::Text}, {"D", T::Integer}, {"P", T::Integer}, {"g", T::Real}, {"c", T::Real},
          {"M", T::Real}, {"rho01", T::Real}, {"rho02", T::Real}, {"energy", T::Real},
          {"n1", T::Real}, {"n2", T::Real}, {"correlation", T::Real}, {"gap", T::Real},
          {"iterations", T::Integer}, {"converged", T::Bool}, {"restart", T::Integer}}},
        {"surface_single.csv",
         {{"id", T::Text}, {"D", T::Integer}, {"gamma", T::Real}, {"c", T::Real}, {"M", T::Real},
          {"rho", T::Real}, {"energy", T::Real}, {"density", T::Real}, {"gap", T::Real},
          {"converged", T::Bool}, {"bethe_energy", T::Real}}},
        {"surface_coupled.csv",
         {{"id", T::Text}, {"D", T::Integer}, {"P", T::Integer}, {"g", T::Real}, {"rho1", T::Real},
          {"rho2", T::Real}, {"energy", T::Real}, {"n1", T::Real}, {"n2", T::Real},
          {"correlation", T::Real}, {"gap", T::Real}, {"converged", T::Bool}}},
        {"luttinger_single.csv",
         {{"D", T::Integer}, {"gamma", T::Real}, {"c", T::Real}, {"rho0", T::Real}, {"M", T::Real},
          {"v", T::Real}, {"K", T::Real}, {"second_derivative", T::Real}, {"spread", T::Real},
          {"v_bethe", T::Real}, {"K_bethe", T::Real}, {"second_derivative_bethe", T::Real},
          {"rel_error_v", T::Real}, {"rel_error_K", T::Real}, {"status", T::Text}}},
        {"luttinger_coupled.csv",
         {{"D", T::Integer}, {"P", T::Integer}, {"g", T::Real}, {"channel", T::Text}, {"v", T::Real},
          {"K", T::Real}, {"second_derivative", T::Real}, {"spread", T::Real}, {"rho_ref", T::Real},
          {"rho_ref_policy", T::Text}, {"status", T::Text}}},
        {"tidy", {{"x", T::Real}, {"y", T::Real}, {"series", T::Text}}},
    };
    return s;
}

CsvTable empty_table(const std::string& name) {
    CsvTable t;
    for (const auto& col : schemas().at(name)) t.header.push_back(col.name);
    return t;
}

std::string r17(double x) { return format_real(x); }
std::string b(bool x) { return x ? "true" : "false"; }

double rel_error(double x, double ref) { return ref != 0.0 ? std::abs(x - ref) / std::abs(ref) : kNaN; }

struct Tables {
    std::map<std::string, CsvTable> files;
    std::vector<std::string> failed;
};

Tables assemble(const RunConfig& cfg, const RunPlan& plan, const fs::path& dir) {
    Tables t;
    std::vector<std::optional<json>> pts;
    for (const auto& p : plan.points) pts.push_back(load_point(dir, p));

    switch (cfg.mode) {
        case RunMode::Bethe: {
            CsvTable tab = empty_table("bethe.csv");
            for (std::size_t i = 0; i < pts.size(); ++i) {
                if (!pts[i]) continue;
                const json& j = *pts[i];
                tab.add_row({r17(j["gamma"]), r17(j["e"]), r17(j["lambda"]), r17(j["residual"]),
                             std::to_string(j["quad_nodes"].get<int>())});
            }
            t.files["bethe.csv"] = std::move(tab);
            break;
        }
        case RunMode::Single: {
            CsvTable tab = empty_table("results_single.csv");
            for (std::size_t i = 0; i < pts.size(); ++i) {
                if (!pts[i]) continue;
                const json& j = *pts[i];
                const PointSpec& p = plan.points[i];
                const double eb = p.c > 0.0
                                      ? energy_density_exact(p.rho1, ModelParams{p.M, p.c, p.rho1},
                                                             cfg.bethe_nodes)
                                      : 0.0;
                const double e = j["energy"];
                tab.add_row({p.id, std::to_string(p.D), r17(p.gamma), r17(p.c), r17(p.M), r17(p.rho1),
                             r17(e), r17(j["densities"][0]), r17(j["constraint_residuals"][0]),
                             r17(json_real(j["gap"], kInf)), std::to_string(j["iterations"].get<int>()),
                             b(j["converged"]), std::to_string(j["restart"].get<int>()), r17(eb),
                             r17(rel_error(e, eb))});
            }
            t.files["results.csv"] = std::move(tab);
            break;
        }
        case RunMode::Coupled: {
            CsvTable tab = empty_table("results_coupled.csv");
            for (std::size_t i = 0; i < pts.size(); ++i) {
                if (!pts[i]) continue;
                const json& j = *pts[i];
                const PointSpec& p = plan.points[i];
                tab.add_row({p.id, std::to_string(p.D), std::to_string(p.P), r17(p.g), r17(p.c),
                             r17(p.M), r17(p.rho1), r17(p.rho2), r17(j["energy"]),
                             r17(j["densities"][0]), r17(j["densities"][1]), r17(j["correlation"]),
                             r17(json_real(j["gap"], kInf)), std::to_string(j["iterations"].get<int>()),
                             b(j["converged"]), std::to_string(j["restart"].get<int>())});
            }
            t.files["results.csv"] = std::move(tab);
            break;
        }
        case RunMode::SweepDensity:
        case RunMode::Luttinger: {
            const bool two = coupled_model(cfg);
            CsvTable surf = empty_table(two ? "surface_coupled.csv" : "surface_single.csv");
            CsvTable lut = empty_table(two ? "luttinger_coupled.csv" : "luttinger_single.csv");
            for (const auto& chain : plan.chains) {
                std::vector<std::size_t> members = chain;
                std::sort(members.begin(), members.end());
                bool complete = true;
                std::vector<SurfaceSample> samples;
                const PointSpec& head = plan.points[members.front()];
                std::vector<double> bethe_e;
                for (std::size_t idx : members) {
                    const PointSpec& p = plan.points[idx];
                    if (!pts[idx]) {
                        complete = false;
                        continue;
                    }
                    const json& j = *pts[idx];
                    const double gap = json_real(j["gap"], kInf);
                    samples.push_back({{p.rho1, p.rho2}, j["energy"], j["converged"], gap});
                    if (two) {
                        surf.add_row({p.id, std::to_string(p.D), std::to_string(p.P), r17(p.g),
                                      r17(p.rho1), r17(p.rho2), r17(j["energy"]),
                                      r17(j["densities"][0]), r17(j["densities"][1]),
                                      r17(j["correlation"]), r17(gap), b(j["converged"])});
                    } else {
                        const double eb = energy_density_exact(p.rho1, ModelParams{p.M, p.c, p.rho1},
                                                               cfg.bethe_nodes);
                        surf.add_row({p.id, std::to_string(p.D), r17(p.gamma), r17(p.c), r17(p.M),
                                      r17(p.rho1), r17(j["energy"]), r17(j["densities"][0]), r17(gap),
                                      b(j["converged"]), r17(eb)});
                    }
                }
                if (cfg.mode != RunMode::Luttinger) continue;

                const std::string tag = head.label.substr(0, head.label.find(" rho"));
                if (!two) {
                    std::vector<std::string> row{std::to_string(head.D), r17(head.gamma), r17(head.c),
                                                 r17(cfg.rho0), r17(cfg.M)};
                    std::string status = "ok";
                    LuttingerResult mine{kNaN, kNaN}, exact{kNaN, kNaN};
                    mine.second_derivative = mine.second_derivative_spread = kNaN;
                    exact.second_derivative = kNaN;
                    try {
                        if (!complete) throw InvalidSurface("surface has missing points");
                        mine = luttinger_single(EnergySurface::one_d(samples), cfg.rho0, cfg.M);
                        std::vector<double> grid;
                        for (const auto& s : samples) grid.push_back(s.point[0]);
                        exact = luttinger_single(
                            bethe_surface(ModelParams{cfg.M, head.c, cfg.rho0}, grid, cfg.bethe_nodes),
                            cfg.rho0, cfg.M);
                    } catch (const Error& e) {
                        status = e.what();
                        t.failed.push_back("luttinger " + tag);
                    }
                    for (double x : {mine.v, mine.K, mine.second_derivative, mine.second_derivative_spread,
                                     exact.v, exact.K, exact.second_derivative,
                                     rel_error(mine.v, exact.v), rel_error(mine.K, exact.K)}) {
                        row.push_back(r17(x));
                    }
                    row.push_back(status);
                    lut.add_row(std::move(row));
                } else {
                    std::vector<double> r1, r2;
                    for (std::size_t idx : members) {
                        const PointSpec& p = plan.points[idx];
                        if (std::find(r1.begin(), r1.end(), p.rho1) == r1.end()) r1.push_back(p.rho1);
                        if (std::find(r2.begin(), r2.end(), p.rho2) == r2.end()) r2.push_back(p.rho2);
                    }
                    for (Channel ch : {Channel::Plus, Channel::Minus}) {
                        std::vector<std::string> row{std::to_string(head.D), std::to_string(head.P),
                                                     r17(head.g), to_string(ch)};
                        std::string status = "ok";
                        LuttingerResult res{kNaN, kNaN};
                        res.second_derivative = res.second_derivative_spread = res.rho_ref = kNaN;
                        try {
                            if (!complete) throw InvalidSurface("surface has missing points");
                            res = luttinger_coupled(EnergySurface::two_d(r1, r2, samples), cfg.rho01,
                                                    cfg.rho02, cfg.M, ch, cfg.rho_ref_policy);
                        } catch (const Error& e) {
                            status = e.what();
                            t.failed.push_back("luttinger " + tag + " " + to_string(ch));
                        }
                        for (double x : {res.v, res.K, res.second_derivative, res.second_derivative_spread,
                                         res.rho_ref}) {
                            row.push_back(r17(x));
                        }
                        row.push_back(to_string(cfg.rho_ref_policy));
                        row.push_back(status);
                        lut.add_row(std::move(row));
                    }
                }
            }
            t.files["surface.csv"] = std::move(surf);
            if (cfg.mode == RunMode::Luttinger) t.files["luttinger.csv"] = std::move(lut);
            break;
        }
    }
    return t;
}

json run_record(const RunConfig& cfg, const std::string& canonical, const RunPlan& plan,
                const fs::path& dir, const std::vector<std::string>& failed, bool finished) {
    json points = json::array();
    for (const auto& p : plan.points) {
        json s{{"id", p.id}, {"label", p.label}};
        if (auto j = load_point(dir, p)) {
            s["converged"] = (*j)["converged"];
            if (j->contains("energy")) s["energy"] = (*j)["energy"];
            if (j->contains("e")) s["e"] = (*j)["e"];
            if (j->contains("correlation")) s["correlation"] = (*j)["correlation"];
        } else {
            s["converged"] = nullptr;
        }
        points.push_back(std::move(s));
    }
    return json{{"software", "cmpslab"},
                {"version", kVersion},
                {"mode", to_string(cfg.mode)},
                {"config_hash", git_blob_hash(canonical)},
                {"config", json::parse(canonical)},
                {"status", finished ? (failed.empty() ? "complete" : "failed") : "running"},
                {"failed", failed},
                {"points", std::move(points)}};
}

RunSummary execute(RunConfig cfg, const fs::path& dir, const RunOptions& options) {
    const std::string canonical = canonical_json(cfg);
    const std::string hash = git_blob_hash(canonical);
    const fs::path record_path = dir / "run.json";
    if (fs::exists(record_path)) {
        const json record = json::parse(read_file(record_path));
        if (record.value("config_hash", "") != hash) {
            throw RunError(dir.string() + ": config hash " + hash + " does not match recorded " +
                           record.value("config_hash", std::string("<none>")));
        }
    }
    fs::create_directories(dir / "points");
    write_file_atomic(dir / "config.json", canonical);

    const RunPlan plan = plan_run(cfg);
    write_json(record_path, run_record(cfg, canonical, plan, dir, {}, false));

    const auto t0 = std::chrono::steady_clock::now();
    std::vector<ChainOutcome> outcomes(plan.chains.size());
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;
    auto worker = [&] {
        for (std::size_t c = next++; c < plan.chains.size(); c = next++) {
            try {
                outcomes[c] = run_chain(cfg, plan, plan.chains[c], dir);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    const int jobs = std::max(1, std::min<int>(options.jobs, static_cast<int>(plan.chains.size())));
    spdlog::info("running {} point(s) in {} chain(s) with {} worker(s)", plan.points.size(),
                 plan.chains.size(), jobs);
    std::vector<std::thread> pool;
    for (int i = 1; i < jobs; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);

    RunSummary summary;
    summary.dir = dir;
    std::map<std::string, double> seconds;
    for (const auto& o : outcomes) {
        summary.computed += o.computed;
        summary.skipped += o.skipped;
        summary.failed.insert(summary.failed.end(), o.failed.begin(), o.failed.end());
        seconds.insert(o.seconds.begin(), o.seconds.end());
    }
    std::sort(summary.failed.begin(), summary.failed.end());

    Tables tables = assemble(cfg, plan, dir);
    for (const auto& [name, table] : tables.files) write_csv(dir / name, table);
    summary.failed.insert(summary.failed.end(), tables.failed.begin(), tables.failed.end());
    write_json(record_path, run_record(cfg, canonical, plan, dir, summary.failed, true));

    // Timings live apart from run.json so every other artifact is reproducible bit for bit.
    json timing{{"wall_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()},
                {"jobs", jobs},
                {"point_seconds", seconds}};
    write_json(dir / "timing.json", timing);
    return summary;
}

}  // namespace

RunSummary run(const RunConfig& config, const RunOptions& options) {
    return execute(config, config.output, options);
}

RunSummary resume(const fs::path& dir, const RunOptions& options) {
    const fs::path config_path = dir / "config.json";
    const fs::path record_path = dir / "run.json";
    if (!fs::exists(config_path) || !fs::exists(record_path)) {
        throw RunError(dir.string() + ": not a run directory (config.json or run.json missing)");
    }
    const std::string text = read_file(config_path);
    const json record = json::parse(read_file(record_path));
    const std::string recorded = record.value("config_hash", "");
    if (git_blob_hash(text) != recorded) {
        throw RunError(dir.string() + ": config.json hash " + git_blob_hash(text) +
                       " does not match recorded " + recorded);
    }
    RunConfig cfg = parse_run_config(text);
    cfg.output = dir;
    return execute(cfg, dir, options);
}

std::vector<CsvColumn> output_schema(const std::string& file_name) {
    auto it = schemas().find(file_name);
    if (it == schemas().end()) throw CsvError("no schema for " + file_name);
    return it->second;
}

CsvTable bethe_table(const std::vector<double>& gammas, int n_nodes) {
    CsvTable tab = empty_table("bethe.csv");
    for (double gamma : gammas) {
        const BetheSolution s = solve_bethe(gamma, n_nodes);
        tab.add_row({r17(s.gamma), r17(s.e_dimensionless), r17(s.lambda), r17(s.residual),
                     std::to_string(s.quad_nodes)});
    }
    return tab;
}

namespace {

double cell(const CsvTable& t, const std::vector<std::string>& row, const std::string& col) {
    const std::string& s = row[t.column(col)];
    if (s == "nan") return kNaN;
    if (s == "inf") return kInf;
    return std::stod(s);
}

std::string series_name(const std::string& prefix, const std::string& value) {
    return prefix + "=" + value;
}

}  // namespace

std::vector<fs::path> report(const fs::path& dir) {
    const fs::path config_path = dir / "config.json";
    if (!fs::exists(config_path)) {
        throw RunError("report: missing input " + config_path.string());
    }
    const RunConfig cfg = parse_run_config(read_file(config_path));
    const bool two = coupled_model(cfg);

    std::vector<std::string> inputs;
    switch (cfg.mode) {
        case RunMode::Bethe: inputs = {"bethe.csv"}; break;
        case RunMode::Single:
        case RunMode::Coupled: inputs = {"results.csv"}; break;
        case RunMode::SweepDensity: inputs = {"surface.csv"}; break;
        case RunMode::Luttinger: inputs = {"surface.csv", "luttinger.csv"}; break;
    }
    std::vector<std::string> missing;
    for (const auto& f : inputs) {
        if (!fs::exists(dir / f)) missing.push_back((dir / f).string());
    }
    if (!missing.empty()) {
        std::string msg = "report: missing input(s):";
        for (const auto& m : missing) msg += " " + m;
        throw RunError(msg);
    }

    std::map<std::string, CsvTable> out;
    auto tidy = [&](const std::string& name) -> CsvTable& {
        auto it = out.find(name);
        if (it == out.end()) it = out.emplace(name, empty_table("tidy")).first;
        return it->second;
    };
    auto emit = [&](const std::string& name, double x, double y, const std::string& series) {
        tidy(name).add_row({r17(x), r17(y), series});
    };
    const bool many_D = cfg.D.size() > 1;
    auto dp_label = [&](const std::string& D, const std::string& P) {
        return many_D ? "D=" + D + " P=" + P : "P=" + P;
    };

    switch (cfg.mode) {
        case RunMode::Bethe: {
            const CsvTable t = read_csv(dir / "bethe.csv");
            for (const auto& row : t.rows) emit("energy_vs_gamma.csv", cell(t, row, "gamma"), cell(t, row, "e"), "bethe");
            break;
        }
        case RunMode::Single: {
            const CsvTable t = read_csv(dir / "results.csv");
            // Dimensionless e(gamma) = e0 2M / rho0^3 so the series share the Bethe axis.
            std::map<double, double> bethe;
            for (const auto& row : t.rows) {
                const double scale = 2.0 * cell(t, row, "M") / std::pow(cell(t, row, "rho0"), 3);
                const double gamma = cell(t, row, "gamma");
                emit("energy_vs_gamma.csv", gamma, cell(t, row, "energy") * scale,
                     series_name("D", row[t.column("D")]));
                if (cell(t, row, "c") > 0.0) bethe[gamma] = cell(t, row, "bethe_energy") * scale;
            }
            for (auto [gamma, e] : bethe) emit("energy_vs_gamma.csv", gamma, e, "bethe");
            break;
        }
        case RunMode::Coupled: {
            const CsvTable t = read_csv(dir / "results.csv");
            for (const auto& row : t.rows) {
                const std::string s = dp_label(row[t.column("D")], row[t.column("P")]);
                const double g = cell(t, row, "g");
                emit("correlation_vs_g.csv", g, cell(t, row, "correlation"), s);
                emit("energy_vs_g.csv", g, cell(t, row, "energy"), s);
            }
            break;
        }
        case RunMode::SweepDensity:
        case RunMode::Luttinger: {
            const CsvTable t = read_csv(dir / "surface.csv");
            std::map<std::string, std::vector<std::pair<double, double>>> bethe;
            for (const auto& row : t.rows) {
                if (two) {
                    const std::string s = dp_label(row[t.column("D")], row[t.column("P")]) +
                                          " g=" + row[t.column("g")] + " rho2=" + row[t.column("rho2")];
                    emit("surface.csv", cell(t, row, "rho1"), cell(t, row, "energy"), s);
                } else {
                    const std::string gamma = row[t.column("gamma")];
                    emit("surface.csv", cell(t, row, "rho"), cell(t, row, "energy"),
                         "D=" + row[t.column("D")] + " gamma=" + gamma);
                    auto& b = bethe["bethe gamma=" + gamma];
                    const std::pair<double, double> xy{cell(t, row, "rho"), cell(t, row, "bethe_energy")};
                    if (std::find(b.begin(), b.end(), xy) == b.end()) b.push_back(xy);
                }
            }
            for (const auto& [s, xs] : bethe) {
                for (auto [x, y] : xs) emit("surface.csv", x, y, s);
            }
            if (cfg.mode != RunMode::Luttinger) break;

            const CsvTable l = read_csv(dir / "luttinger.csv");
            if (!two) {
                std::map<double, std::pair<double, double>> exact;
                for (const auto& row : l.rows) {
                    const double gamma = cell(l, row, "gamma");
                    const std::string D = row[l.column("D")];
                    emit("luttinger_vs_gamma.csv", gamma, cell(l, row, "v"), "v D=" + D);
                    emit("luttinger_vs_gamma.csv", gamma, cell(l, row, "K"), "K D=" + D);
                    exact[gamma] = {cell(l, row, "v_bethe"), cell(l, row, "K_bethe")};
                }
                for (auto [gamma, vk] : exact) {
                    emit("luttinger_vs_gamma.csv", gamma, vk.first, "v bethe");
                    emit("luttinger_vs_gamma.csv", gamma, vk.second, "K bethe");
                }
            } else {
                for (const auto& row : l.rows) {
                    const std::string sign = row[l.column("channel")] == "plus" ? "+" : "-";
                    const std::string s = dp_label(row[l.column("D")], row[l.column("P")]);
                    const double g = cell(l, row, "g");
                    emit("luttinger_modes_vs_g.csv", g, cell(l, row, "v"), "v" + sign + " " + s);
                    emit("luttinger_modes_vs_g.csv", g, cell(l, row, "K"), "K" + sign + " " + s);
                }
            }
            break;
        }
    }

    std::vector<fs::path> written;
    for (const auto& [name, table] : out) {
        const fs::path path = dir / "report" / name;
        write_csv(path, table);
        written.push_back(path);
    }
    return written;
}

}  // namespace cmpslab
