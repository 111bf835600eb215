#include <doctest.h>

#include "bifurc/config.hpp"
#include "bifurc/toml.hpp"

using namespace bifurc;

TEST_CASE("toml subset parser") {
  const TomlDoc doc = parse_toml(
      "# comment\n"
      "[model]\n"
      "eps = 1e-4  # inline comment\n"
      "name = \"reflected\"\n"
      "flag = true\n"
      "grid = [1, 2.5, 3]\n"
      "\n"
      "[simulation]\n"
      "seed = 42\n");
  CHECK(doc.number_or("model", "eps", 0.0) == 1e-4);
  CHECK(doc.string_or("model", "name", "") == "reflected");
  CHECK(doc.bool_or("model", "flag", false));
  CHECK(doc.int_or("simulation", "seed", 0) == 42);
  REQUIRE(doc.find("model", "grid") != nullptr);
  CHECK(doc.find("model", "grid")->array.size() == 3);
  CHECK(doc.find("model", "grid")->array[1].as_number() == 2.5);
  CHECK(doc.find("model", "missing") == nullptr);

  CHECK_THROWS_WITH_AS(parse_toml("[model\n"), "toml: line 1: unterminated section header",
                       DataError);
  CHECK_THROWS_WITH_AS(parse_toml("[m]\nkey\n"), "toml: line 2: expected key = value", DataError);
  CHECK_THROWS_WITH_AS(parse_toml("[m]\nk = @bad\n"),
                       "toml: line 2: cannot parse value '@bad'", DataError);
}

TEST_CASE("defaults mirror the numerical study") {
  const ExperimentConfig c = ExperimentConfig::from_toml_text("[simulation]\nseed = 7\n");
  CHECK(c.eps == 1e-4);
  CHECK(c.x0 == 0.5);
  CHECK(c.dt == 5e-4);
  CHECK(c.grid_nx == 200);
  CHECK(c.grid_ny == 200);
  CHECK(c.varpi == 1e-6);
  CHECK(c.seed == 7);
  CHECK(c.bandwidth_mode == BandwidthMode::Practical);
}

TEST_CASE("seed is mandatory") {
  CHECK_THROWS_AS(ExperimentConfig::from_toml_text("[model]\neps = 0.1\n"), ConfigError);
}

TEST_CASE("config round-trips through its serialization") {
  ExperimentConfig c;
  c.seed = 123456789;
  c.eps = 0.1;
  c.drift_r1 = -0.25;
  c.depth = 9;
  c.rho = 0.5;
  c.q_evaluator = QEvaluatorKind::Nonparam;
  c.rate_family = RateFamilyKind::Affine;
  c.theta_min = 1.375;
  c.theta_max = 3.0;
  c.dtheta = 0.125;
  c.dtheta_floor = 0.125;
  c.aux_per_replication = false;
  c.replications = 11;
  c.jobs = 2;
  c.output_dir = "elsewhere";
  const ExperimentConfig back = ExperimentConfig::from_toml_text(c.to_toml());
  CHECK(back == c);
  CHECK(back.hash() == c.hash());

  ExperimentConfig other = c;
  other.theta_true = 15.0;
  CHECK(other.hash() != c.hash());
}

TEST_CASE("config validation rejects broken setups") {
  ExperimentConfig c;
  c.seed = 1;
  c.eps = 0.7;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = ExperimentConfig{};
  c.seed = 1;
  c.theta_min = 3.0;
  c.theta_max = 2.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_toml_text("[model]\ndrift = \"banana\"\n[simulation]\nseed = 1\n"),
                  ConfigError);
}

TEST_CASE("model building from config") {
  ExperimentConfig c;
  c.seed = 1;
  c.eps = 0.1;
  ModelSpec model = build_model(c, 2.0);
  CHECK(model.diffusion.reflected());
  CHECK(model.rate.rate(0.3) == 2.0);
  CHECK_NOTHROW(model.validate());

  const SpectralParams p = build_spectral_params(c);
  CHECK(p.r1 == c.drift_r1);
  CHECK(p.eps == 0.1);

  c.rate_family = RateFamilyKind::Affine;
  ModelSpec affine = build_model(c, 2.0);
  CHECK(affine.rate.rate(0.5) == doctest::Approx(2.0));
  CHECK_THROWS_AS(build_spectral_params(c), ConfigError);

  c.rate_family = RateFamilyKind::Constant;
  c.drift = DriftKind::OrnsteinUhlenbeck;
  c.domain = DomainKind::FullLine;
  ModelSpec ou = build_model(c, 1.0);
  CHECK_FALSE(ou.diffusion.reflected());
  CHECK_THROWS_AS(build_spectral_params(c), ConfigError);
}
