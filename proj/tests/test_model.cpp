#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "aif/env.hpp"
#include "aif/errors.hpp"
#include "aif/model.hpp"
#include "aif/model_io.hpp"
#include "oracles.hpp"
#include "random_models.hpp"

using namespace aif;

TEST_CASE("tmaze model is valid and has the expected shape") {
  const auto m = tmaze::build_model().model;
  CHECK(validate_model(m).empty());
  CHECK(m.states.dims() == std::vector<std::size_t>{4, 2});
  CHECK(m.observations.dims() == std::vector<std::size_t>{4, 3, 2});
  CHECK(m.num_actions() == 4);
  CHECK(m.horizon == 3);
}

TEST_CASE("a B column summing to 0.9 is reported once") {
  auto m = tmaze::build_model().model;
  m.B.tables[0][(2 * 4 + 1) * 4 + 2] -= 0.1;  // action left arm, prev right arm
  const auto v = validate_model(m);
  REQUIRE(v.size() == 1);
  CHECK(v[0].kernel == "B");
  CHECK(v[0].index.find('0') != std::string::npos);
  CHECK_THROWS_AS(require_valid(m), ShapeError);
}

TEST_CASE("a negative preference weight is reported on C") {
  auto m = tmaze::build_model().model;
  m.C.space = PreferenceSpace::kProbability;
  m.C.values = {{1, 1, 1, 1}, {2, 3, -1}, {1, 1}};
  const auto v = validate_model(m);
  REQUIRE(v.size() == 1);
  CHECK(v[0].kernel == "C");
}

TEST_CASE("all-zero preference modality is rejected") {
  auto m = tmaze::build_model().model;
  m.C.space = PreferenceSpace::kProbability;
  m.C.values = {{1, 1, 1, 1}, {0, 0, 0}, {1, 1}};
  CHECK_FALSE(validate_model(m).empty());
}

TEST_CASE("joint likelihood on tmaze") {
  const auto m = tmaze::build_model().model;
  const Index s = tmaze::state_index(tmaze::kCenter, tmaze::kRewardOnRight);
  CHECK(joint_likelihood(m, tmaze::observation_index(tmaze::kCenter, tmaze::kNoReward, tmaze::kCueRight), s) ==
        doctest::Approx(0.5).epsilon(1e-15));
  for (Index r = 0; r < 3; ++r)
    for (Index c = 0; c < 2; ++c)
      CHECK(joint_likelihood(m, tmaze::observation_index(tmaze::kLeftArm, r, c), s) == 0.0);
  CHECK_THROWS_AS(joint_likelihood(m, 24, s), IndexError);
  CHECK_THROWS_AS(joint_likelihood(m, 0, 8), IndexError);
}

TEST_CASE("single modality likelihood is the table entry") {
  std::mt19937_64 rng(3);
  testing_support::RandomSpec spec;
  spec.max_modalities = 1;
  for (int i = 0; i < 20; ++i) {
    const auto m = testing_support::random_model(rng, spec);
    for (Index s = 0; s < m.num_states(); ++s)
      for (Index o = 0; o < m.num_observations(); ++o)
        CHECK(joint_likelihood(m, o, s) == m.A.tables[0][s * m.observations.dim(0) + o]);
  }
}

TEST_CASE("likelihood sums to one over joint observations") {
  std::mt19937_64 rng(11);
  testing_support::RandomSpec spec;
  spec.max_joint = 8;
  for (int i = 0; i < 50; ++i) {
    const auto m = testing_support::random_model(rng, spec);
    REQUIRE(validate_model(m).empty());
    for (Index s = 0; s < m.num_states(); ++s) {
      double total = 0.0;
      for (Index o = 0; o < m.num_observations(); ++o) total += joint_likelihood(m, o, s);
      CHECK(std::abs(total - 1.0) < 1e-10);
    }
  }
}

TEST_CASE("joint helpers agree with the brute-force products") {
  std::mt19937_64 rng(5);
  testing_support::RandomSpec spec;
  for (int i = 0; i < 30; ++i) {
    const auto m = testing_support::random_model(rng, spec);
    const auto d = joint_initial_prior(m);
    for (Index s = 0; s < m.num_states(); ++s) {
      CHECK(d[s] == doctest::Approx(oracle::prior(m, s)).epsilon(1e-14));
      for (Index p = 0; p < m.num_states(); ++p)
        for (Index a = 0; a < m.num_actions(); ++a)
          CHECK(joint_transition(m, s, p, a) == doctest::Approx(oracle::trans(m, s, p, a)).epsilon(1e-14));
      for (Index o = 0; o < m.num_observations(); ++o)
        CHECK(joint_likelihood(m, o, s) == doctest::Approx(oracle::lik(m, o, s)).epsilon(1e-14));
    }
  }
}

TEST_CASE("model file round trip is exact") {
  std::mt19937_64 rng(17);
  testing_support::RandomSpec spec;
  spec.max_joint = 8;
  const auto dir = std::filesystem::temp_directory_path() / "aif_model_roundtrip";
  std::filesystem::create_directories(dir);
  for (int i = 0; i < 100; ++i) {
    spec.c_space = i % 2 ? PreferenceSpace::kLog : PreferenceSpace::kProbability;
    spec.normalize_c = i % 3 != 0;
    const auto m = testing_support::random_model(rng, spec);
    CHECK(parse_model(serialize_model(m)) == m);
    const auto path = dir / ("m" + std::to_string(i) + ".json");
    save_model(m, path);
    CHECK(load_model(path) == m);
  }
  const auto t = tmaze::build_model().model;
  save_model(t, dir / "tmaze.json");
  const auto back = load_model(dir / "tmaze.json");
  CHECK(back == t);
  CHECK(back.states.dims() == std::vector<std::size_t>{4, 2});
}

TEST_CASE("shipped tmaze model file matches the builder") {
  const auto m = load_model(std::filesystem::path(AIF_SOURCE_DIR) / "tests" / "data" / "tmaze.json");
  CHECK(m == tmaze::build_model().model);
}

TEST_CASE("parse errors") {
  CHECK_THROWS_AS(parse_model(""), ParseError);
  CHECK_THROWS_AS(parse_model("{\"state_factors\": [2],"), ParseError);
  CHECK_THROWS_AS(parse_model("{}"), ParseError);
  try {
    parse_model("{\n  \"state_factors\": [2\n  \"x\"}");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line") != std::string::npos);
  }
}

TEST_CASE("shape mismatch in a model file") {
  auto m = tmaze::build_model().model;
  auto text = serialize_model(m);
  // One modality short.
  m.observations = ObservationSpace({4, 3});
  auto json_text = text;
  const auto pos = json_text.find("\"obs_modalities\"");
  REQUIRE(pos != std::string::npos);
  const auto end = json_text.find(']', pos);
  json_text.replace(pos, end - pos + 1, "\"obs_modalities\": [4, 3]");
  CHECK_THROWS_AS(parse_model(json_text), ShapeError);
}

TEST_CASE("preference conventions") {
  auto m = tmaze::build_model().model;
  // Log space, normalized: ln softmax(2, 3, 1).
  const auto lp = log_preferences_by_modality(m, 2);
  const double z = std::log(std::exp(2.0) + std::exp(3.0) + std::exp(1.0));
  CHECK(lp[1][1] == doctest::Approx(3.0 - z).epsilon(1e-14));
  CHECK(preference_log_normalizer(m, 2) == 0.0);
  m.C.normalize = false;
  CHECK(log_preferences_by_modality(m, 2)[1][1] == 3.0);
  m.C.space = PreferenceSpace::kProbability;
  m.C.values = {{1, 1, 1, 1}, {2, 3, 1}, {1, 1}};
  CHECK(log_preferences_by_modality(m, 2)[1][1] == doctest::Approx(std::log(3.0)));
  m.C.normalize = true;
  CHECK(log_preferences_by_modality(m, 2)[1][1] == doctest::Approx(std::log(0.5)));
  CHECK(log_preferences_by_modality(m, 2)[0][0] == doctest::Approx(std::log(0.25)));
}

TEST_CASE("per-time preferences") {
  auto m = tmaze::build_model().model;
  m.C.per_time = {m.C.values, m.C.values, {{0, 0, 0, 0}, {0, 5, 0}, {0, 0}}};
  CHECK(validate_model(m).empty());
  CHECK(m.C.at_time(3)[1][1] == 5.0);
  CHECK(m.C.at_time(2)[1][1] == 3.0);
  CHECK(parse_model(serialize_model(m)) == m);
}
