#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <variant>

#include "levymfg/config.hpp"

namespace {

const char* kSample = R"(# reference configuration
[model]
family = compound_poisson
lambda1 = 1.5
alpha1 = 1.0
lambda2 = 3
alpha2 = 2.0   # trailing comment

[cost]
h = exp_cos
q = 0.5

[solver]
eps = 0.1
legacy_constants = true

[mc]
seed = 42
n_paths = 1000
workers = 3
)";

}  // namespace

TEST_CASE("config: sections and typed getters") {
    const auto cfg = mfg::Config::from_string(kSample);
    CHECK(cfg.get_string("model.family") == "compound_poisson");
    CHECK(cfg.get_double("model.lambda2") == 3.0);
    CHECK(cfg.get_int("mc.seed") == 42);
    CHECK(cfg.get_bool("solver.legacy_constants", false));
    CHECK(cfg.has("cost.h"));
    CHECK_FALSE(cfg.has("cost.f"));
    // fallbacks only engage for missing keys
    CHECK(cfg.get_double("solver.eps", 9.0) == 0.1);
    CHECK(cfg.get_double("solver.tol", 9.0) == 9.0);
}

TEST_CASE("config: trailing comments are stripped, values may contain spaces") {
    const auto cfg = mfg::Config::from_string(kSample);
    CHECK(cfg.get_double("model.alpha2") == 2.0);
}

TEST_CASE("config: missing keys and malformed numbers throw with the key name") {
    const auto cfg = mfg::Config::from_string(kSample);
    CHECK_THROWS_WITH_AS(cfg.get_double("model.sigma"),
                         doctest::Contains("model.sigma"), mfg::ConfigError);
    auto bad = mfg::Config::from_string("[mc]\nseed = 12x\n");
    CHECK_THROWS_AS(bad.get_int("mc.seed"), mfg::ConfigError);
}

TEST_CASE("config: parse errors carry the line number") {
    CHECK_THROWS_WITH_AS(mfg::Config::from_string("[model]\nlambda1\n"),
                         doctest::Contains("line 2"), mfg::ConfigError);
    CHECK_THROWS_AS(mfg::Config::from_string("key_without_section = 1\n"), mfg::ConfigError);
}

TEST_CASE("config: overrides replace values and extend the map") {
    auto cfg = mfg::Config::from_string(kSample);
    cfg.apply_override("solver.eps", "0.2");
    cfg.apply_override("band.a", "-1.5");
    CHECK(cfg.get_double("solver.eps") == 0.2);
    CHECK(cfg.get_double("band.a") == -1.5);
}

TEST_CASE("config: canonical form and hash are stable and value sensitive") {
    const auto cfg1 = mfg::Config::from_string(kSample);
    const auto cfg2 = mfg::Config::from_string(kSample);
    CHECK(cfg1.canonical() == cfg2.canonical());
    CHECK(cfg1.hash() == cfg2.hash());
    CHECK(cfg1.hash().size() == 16);

    auto cfg3 = mfg::Config::from_string(kSample);
    cfg3.apply_override("mc.seed", "43");
    CHECK(cfg3.hash() != cfg1.hash());
}

TEST_CASE("config: model extraction and family dispatch") {
    const auto cfg = mfg::Config::from_string(kSample);
    const auto model = mfg::model_from_config(cfg);
    const auto* cp = std::get_if<mfg::CompoundPoissonTwoExp>(&model);
    REQUIRE(cp != nullptr);
    CHECK(cp->lambda1 == 1.5);
    CHECK(cp->alpha2 == 2.0);

    auto stable = mfg::Config::from_string(
        "[model]\nfamily = stable\nalpha = 1.5\nc_plus = 1\nc_minus = 2\n");
    CHECK(std::holds_alternative<mfg::StrictlyStable>(mfg::model_from_config(stable)));

    auto unknown = mfg::Config::from_string("[model]\nfamily = gamma\n");
    CHECK_THROWS_AS(mfg::model_from_config(unknown), mfg::ConfigError);

    auto invalid = mfg::Config::from_string(
        "[model]\nfamily = compound_poisson\nlambda1 = -1\nalpha1 = 1\nlambda2 = 1\nalpha2 = 1\n");
    CHECK_THROWS_AS(mfg::model_from_config(invalid), mfg::ConfigError);
}

TEST_CASE("config: cost extraction with shared and split barrier charges") {
    const auto cfg = mfg::Config::from_string(kSample);
    const auto cost = mfg::cost_from_config(cfg);
    CHECK(cost.h == mfg::FieldWeight::ExpCos);
    CHECK(cost.f == mfg::FieldFunction::Identity);
    CHECK(cost.q_u == 0.5);
    CHECK(cost.q_d == 0.5);

    auto split = mfg::Config::from_string("[cost]\nq = 0.5\nq_u = 0.7\n");
    const auto split_cost = mfg::cost_from_config(split);
    CHECK(split_cost.q_u == 0.7);
    CHECK(split_cost.q_d == 0.5);
}

TEST_CASE("config: solver mode and monte carlo settings") {
    const auto cfg = mfg::Config::from_string(kSample);
    CHECK(mfg::mode_from_config(cfg) == mfg::ConstantsMode::LegacyTables);
    CHECK(mfg::mode_from_config(mfg::Config::from_string("")) ==
          mfg::ConstantsMode::Consistent);

    const auto mc = mfg::mc_from_config(cfg);
    CHECK(mc.seed == 42);
    CHECK(mc.n_paths == 1000);
    CHECK(mc.workers == 3);
    CHECK(mc.horizon == 1e4);

    auto bad = mfg::Config::from_string("[mc]\nn_paths = -5\n");
    CHECK_THROWS_AS(mfg::mc_from_config(bad), mfg::ConfigError);
}
