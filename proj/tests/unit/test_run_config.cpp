#include <gtest/gtest.h>

#include "cmpslab/errors.hpp"
#include "cmpslab/run_config.hpp"

using namespace cmpslab;

namespace {

std::string error_of(const std::string& json) {
    try {
        parse_run_config(json);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST(RunConfig, MinimalSingle) {
    const RunConfig c = parse_run_config(R"({"mode":"single","D":4})");
    EXPECT_EQ(c.mode, RunMode::Single);
    EXPECT_EQ(c.D, std::vector<int>{4});
    EXPECT_EQ(c.M, 0.5);
    EXPECT_EQ(c.optimizer.restarts, 8);
}

TEST(RunConfig, FullCoupled) {
    const RunConfig c = parse_run_config(R"({
      "mode": "coupled", "output": "out", "seed": 9,
      "model": {"M": 0.5, "c": 1.5, "rho01": 0.63, "rho02": 0.63},
      "D": 3, "P": [0, 2], "g": [0, 0.5, 1.0],
      "optimizer": {"restarts": 4, "constraint_tol": 1e-10, "warm_restarts": 2},
      "init": "single"})");
    EXPECT_EQ(c.P, (std::vector<int>{0, 2}));
    EXPECT_EQ(c.g_grid.size(), 3u);
    EXPECT_EQ(c.seed, 9u);
    EXPECT_EQ(c.optimizer.seed, 9u);
    EXPECT_EQ(c.warm_restarts, 2);
    EXPECT_TRUE(c.coupled_single_init);
    EXPECT_EQ(c.output, "out");
}

TEST(RunConfig, ErrorsCarryKeyPaths) {
    EXPECT_NE(error_of(R"({"mode":"single","D":4,"extra":1})").find("extra: unknown key"), std::string::npos);
    EXPECT_NE(error_of(R"({"mode":"single","D":4,"model":{"rho":1}})").find("model.rho: unknown key"),
              std::string::npos);
    EXPECT_NE(error_of(R"({"mode":"single","D":4,"model":{"M":-1}})").find("model.M"), std::string::npos);
    EXPECT_NE(error_of(R"({"mode":"single","D":[4,"x"]})").find("D[1]"), std::string::npos);
    EXPECT_NE(error_of(R"({"mode":"single"})").find("D: required"), std::string::npos);
    EXPECT_NE(error_of(R"({"mode":"bethe"})").find("gamma"), std::string::npos);
    EXPECT_NE(error_of(R"({"mode":"warp","D":1})").find("mode"), std::string::npos);
    EXPECT_NE(error_of(R"({"mode":"coupled","D":2,"P":9})").find("P: must be in [0, 8]"), std::string::npos);
    EXPECT_NE(error_of(R"({"mode":"single","D":2,"g":[1]})").find("g: unknown key"), std::string::npos);
    EXPECT_NE(error_of(R"({"mode":"single","D":2,"optimizer":{"penalty_growth":1}})").find("optimizer.penalty_growth"),
              std::string::npos);
    EXPECT_NE(error_of(R"({"mode":"single","D":[4,2]})").find("increasing"), std::string::npos);
    EXPECT_NE(error_of(R"({"mode":"luttinger","D":2,"density_grid":{"nodes":5}})").find("density_grid.nodes"),
              std::string::npos);
    EXPECT_NE(error_of(R"({"mode":"luttinger","fields":2,"D":2,"P":1,"model":{"rho01":0.6,"rho02":0.7}})")
                  .find("rho01 == rho02"),
              std::string::npos);
    EXPECT_NE(error_of("{not json").find("invalid JSON"), std::string::npos);
    EXPECT_NE(error_of(R"({"mode":"bethe","gamma":[1,-2]})").find("gamma[1]"), std::string::npos);
}

TEST(RunConfig, CanonicalJsonRoundTripsAndHashes) {
    const RunConfig c = parse_run_config(
        R"({"mode":"luttinger","fields":2,"D":2,"P":1,"g":[0.5],"rho_ref_policy":"per_species","output":"x"})");
    const std::string canon = canonical_json(c);
    const RunConfig back = parse_run_config(canon);
    EXPECT_EQ(canonical_json(back), canon);
    EXPECT_EQ(back.rho_ref_policy, RhoRefPolicy::PerSpecies);
    // output directory is not part of the identity of a run
    RunConfig moved = c;
    moved.output = "elsewhere";
    EXPECT_EQ(canonical_json(moved), canon);
    for (const char* mode : {R"({"mode":"bethe","gamma":[1,2]})", R"({"mode":"single","D":[1,2],"gamma":2})",
                             R"({"mode":"sweep-density","D":2})", R"({"mode":"coupled","D":2,"P":0})"}) {
        const RunConfig m = parse_run_config(mode);
        EXPECT_EQ(canonical_json(parse_run_config(canonical_json(m))), canonical_json(m)) << mode;
    }
}

TEST(GitBlobHash, MatchesGit) {
    // `printf 'hello\n' | git hash-object --stdin`
    EXPECT_EQ(git_blob_hash("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
    EXPECT_EQ(git_blob_hash(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
}

TEST(RunConfig, CoupledPairsDefaultToTwo) {
    EXPECT_EQ(parse_run_config(R"({"mode":"coupled","D":2})").P, std::vector<int>{2});
    EXPECT_TRUE(parse_run_config(R"({"mode":"single","D":2})").P.empty());
}

TEST(RunConfig, ShippedExamplesParse) {
    int seen = 0;
    for (const auto& e : std::filesystem::directory_iterator(CMPSLAB_CONFIG_DIR)) {
        if (e.path().extension() != ".json") continue;
        EXPECT_NO_THROW(load_run_config(e.path())) << e.path();
        ++seen;
    }
    EXPECT_GE(seen, 5);
}
