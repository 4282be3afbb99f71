#include <gtest/gtest.h>

#include <random>

#include "acf/adam.hpp"
#include "acf/errors.hpp"
#include "oracles/rnn_oracle.hpp"

using namespace acf;

namespace {

ParameterSet make_set(std::mt19937_64& rng) {
  ParameterSet p;
  p.add("a", 3, 2);
  p.add("b", 4, 1);
  for (auto& t : p)
    for (Eigen::Index i = 0; i < t.value.size(); ++i) t.value.data()[i] = 2.0 * unit_uniform(rng()) - 1.0;
  return p;
}

std::vector<double> flat(const ParameterSet& p) {
  std::vector<double> out;
  for (const auto& t : p) out.insert(out.end(), t.value.data(), t.value.data() + t.value.size());
  return out;
}

}  // namespace

TEST(Adam, MatchesScalarOracleOverManySteps) {
  std::mt19937_64 rng(1);
  ParameterSet params = make_set(rng);
  std::vector<double> ref = flat(params);
  AdamState state = AdamState::zeros_like(params);
  const AdamConfig cfg{0.01, 0.9, 0.999, 1e-8};
  oracle::AdamOracle o{cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.eps, {}, {}, 0};
  for (int step = 0; step < 50; ++step) {
    ParameterSet g = make_set(rng);
    adam_step(params, g, state, cfg);
    o.step(ref, flat(g));
    const auto got = flat(params);
    for (std::size_t i = 0; i < got.size(); ++i) ASSERT_NEAR(got[i], ref[i], 1e-14) << "step " << step;
  }
  EXPECT_EQ(state.step, 50);
}

TEST(Adam, FirstStepMovesEachParameterByLearningRate) {
  // With bias correction the first update is lr * g / (|g| + eps).
  ParameterSet p;
  p.add("w", 1, 3).setZero();
  ParameterSet g = p.zeros_like();
  g["w"] << 0.5, -2.0, 0.0;
  AdamState s = AdamState::zeros_like(p);
  adam_step(p, g, s, {0.1, 0.9, 0.999, 1e-8});
  EXPECT_NEAR(p["w"](0, 0), -0.1 * 0.5 / (0.5 + 1e-8), 1e-15);
  EXPECT_NEAR(p["w"](0, 1), 0.1 * 2.0 / (2.0 + 1e-8), 1e-15);
  EXPECT_EQ(p["w"](0, 2), 0.0);
}

TEST(Adam, ConvergesOnAQuadratic) {
  ParameterSet p;
  p.add("x", 2, 1) << 3.0, -4.0;
  AdamState s = AdamState::zeros_like(p);
  for (int i = 0; i < 3000; ++i) {
    ParameterSet g = p.zeros_like();
    g["x"] = 2.0 * (p["x"].array() - 1.0).matrix();
    adam_step(p, g, s, {0.05, 0.9, 0.999, 1e-8});
  }
  EXPECT_NEAR(p["x"](0, 0), 1.0, 1e-3);
  EXPECT_NEAR(p["x"](1, 0), 1.0, 1e-3);
}

TEST(Adam, ShapeMismatchIsAContractViolation) {
  std::mt19937_64 rng(2);
  ParameterSet p = make_set(rng);
  ParameterSet g;
  g.add("a", 3, 2);
  AdamState s = AdamState::zeros_like(p);
  EXPECT_THROW(adam_step(p, g, s, {}), ContractViolation);
  ParameterSet wrong;
  wrong.add("a", 2, 3);
  wrong.add("b", 4, 1);
  EXPECT_THROW(adam_step(p, wrong, s, {}), ContractViolation);
}

TEST(Adam, ConfigFromTrainingConfig) {
  TrainingConfig t;
  t.learning_rate = 0.02;
  t.adam_eps = 1e-6;
  const auto a = AdamConfig::from(t);
  EXPECT_EQ(a.learning_rate, 0.02);
  EXPECT_EQ(a.beta1, 0.9);
  EXPECT_EQ(a.beta2, 0.999);
  EXPECT_EQ(a.eps, 1e-6);
}
