#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "acf/errors.hpp"
#include "acf/model.hpp"
#include "oracles/rnn_oracle.hpp"

using namespace acf;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

Window random_window(const ModelDims& dims, int n, std::mt19937_64& rng) {
  Window w;
  for (int t = 0; t < n; ++t) {
    VectorXd ctx = VectorXd::Zero(dims.context_size());
    if (dims.app_count > 0) ctx(static_cast<Eigen::Index>(rng() % static_cast<unsigned>(dims.app_count))) = 1.0;
    ctx(dims.app_count) = unit_uniform(rng());
    ctx(dims.app_count + 1) = unit_uniform(rng());
    ctx(dims.app_count + 2) = static_cast<double>(rng() % 4);
    w.push_back({static_cast<int>(rng() % static_cast<unsigned>(dims.vocab_size)), ctx});
  }
  return w;
}

MatrixXd rand_mat(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
  MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = 2.0 * unit_uniform(rng()) - 1.0;
  return m;
}

/// Model forward recomputed from the elementwise cell oracles and a plain head.
std::vector<double> oracle_forward(const Model& m, const Window& w) {
  const auto& P = m.params();
  const int H = m.config().hidden_size;
  std::vector<VectorXd> xs;
  for (const auto& s : w) xs.push_back(to_dense(s, m.dims()));
  for (int l = 0; l < m.config().num_layers; ++l) {
    const std::string p = "rnn.l" + std::to_string(l) + ".";
    VectorXd h = VectorXd::Zero(H), c = VectorXd::Zero(H);
    std::vector<VectorXd> out;
    for (const auto& x : xs) {
      if (m.config().cell == CellType::gru) {
        oracle::GruWeights g{P[p + "W_z"], P[p + "W_r"], P[p + "W_n"], P[p + "U_z"], P[p + "U_r"], P[p + "U_n"],
                             P[p + "b_z"], P[p + "b_r"], P[p + "b_n"]};
        h = oracle::gru(g, x, h);
      } else {
        oracle::LstmWeights g{P[p + "W_i"], P[p + "W_f"], P[p + "W_g"], P[p + "W_o"], P[p + "U_i"], P[p + "U_f"],
                              P[p + "U_g"], P[p + "U_o"], P[p + "b_i"], P[p + "b_f"], P[p + "b_g"], P[p + "b_o"]};
        std::tie(h, c) = oracle::lstm(g, x, h, c);
      }
      out.push_back(h);
    }
    xs = out;
  }
  const VectorXd& h = xs.back();
  const MatrixXd &W1 = P["head.W1"], &b1 = P["head.b1"], &W2 = P["head.W2"], &b2 = P["head.b2"];
  std::vector<double> a(static_cast<std::size_t>(W1.rows()));
  for (Eigen::Index i = 0; i < W1.rows(); ++i) a[static_cast<std::size_t>(i)] = std::tanh(oracle::affine(W1, h, i) + b1(i, 0));
  const VectorXd av = Eigen::Map<VectorXd>(a.data(), static_cast<Eigen::Index>(a.size()));
  std::vector<double> logits;
  for (Eigen::Index k = 0; k < W2.rows(); ++k) logits.push_back(oracle::affine(W2, av, k) + b2(k, 0));
  const double mx = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double& v : logits) z += (v = std::exp(v - mx));
  for (double& v : logits) v /= z;
  return logits;
}

}  // namespace

TEST(Cells, GruMatchesElementwiseOracle) {
  std::mt19937_64 rng(1);
  const int H = 5, I = 7;
  GruParams p{rand_mat(H, I, rng), rand_mat(H, I, rng), rand_mat(H, I, rng), rand_mat(H, H, rng),
              rand_mat(H, H, rng), rand_mat(H, H, rng), rand_mat(H, 1, rng), rand_mat(H, 1, rng),
              rand_mat(H, 1, rng)};
  const VectorXd x = rand_mat(I, 1, rng), h = rand_mat(H, 1, rng);
  const oracle::GruWeights o{p.W_z, p.W_r, p.W_n, p.U_z, p.U_r, p.U_n, p.b_z, p.b_r, p.b_n};
  EXPECT_LE((gru_forward(p, x, h) - oracle::gru(o, x, h)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Cells, LstmMatchesElementwiseOracle) {
  std::mt19937_64 rng(2);
  const int H = 4, I = 6;
  LstmParams p{rand_mat(H, I, rng), rand_mat(H, I, rng), rand_mat(H, I, rng), rand_mat(H, I, rng),
               rand_mat(H, H, rng), rand_mat(H, H, rng), rand_mat(H, H, rng), rand_mat(H, H, rng),
               rand_mat(H, 1, rng), rand_mat(H, 1, rng), rand_mat(H, 1, rng), rand_mat(H, 1, rng)};
  const VectorXd x = rand_mat(I, 1, rng), h = rand_mat(H, 1, rng), c = rand_mat(H, 1, rng);
  const oracle::LstmWeights o{p.W_i, p.W_f, p.W_g, p.W_o, p.U_i, p.U_f, p.U_g, p.U_o, p.b_i, p.b_f, p.b_g, p.b_o};
  const auto [h2, c2] = lstm_forward(p, x, h, c);
  const auto [oh, oc] = oracle::lstm(o, x, h, c);
  EXPECT_LE((h2 - oh).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LE((c2 - oc).cwiseAbs().maxCoeff(), 1e-14);
}

class ModelByCell : public ::testing::TestWithParam<std::tuple<CellType, int>> {};

TEST_P(ModelByCell, ForwardMatchesOracleComposition) {
  TrainingConfig cfg;
  cfg.cell = std::get<0>(GetParam());
  cfg.num_layers = std::get<1>(GetParam());
  cfg.hidden_size = 6;
  cfg.n_past = 4;
  const ModelDims dims{9, 3};
  Model m(cfg, dims);
  m.initialize(7);
  std::mt19937_64 rng(3);
  for (int t = 0; t < 5; ++t) {
    const Window w = random_window(dims, cfg.n_past, rng);
    const auto got = m.forward(w).probs;
    const auto want = oracle_forward(m, w);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-13);
  }
}

TEST_P(ModelByCell, GradientMatchesFiniteDifferences) {
  TrainingConfig cfg;
  cfg.cell = std::get<0>(GetParam());
  cfg.num_layers = std::get<1>(GetParam());
  cfg.hidden_size = 5;
  cfg.n_past = 3;
  const ModelDims dims{7, 2};
  Model m(cfg, dims);
  m.initialize(11);
  std::mt19937_64 rng(4);
  const Window w = random_window(dims, cfg.n_past, rng);
  const int target = 3;
  const ParameterSet g = m.backward(w, target);
  const double h = 1e-5;
  for (std::size_t k = 0; k < m.params().size(); ++k) {
    auto& v = m.params().at(k).value;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const double keep = v.data()[i];
      v.data()[i] = keep + h;
      const double up = cross_entropy(m.forward(w), target);
      v.data()[i] = keep - h;
      const double dn = cross_entropy(m.forward(w), target);
      v.data()[i] = keep;
      const double num = (up - dn) / (2 * h);
      const double ana = g.at(k).value.data()[i];
      EXPECT_LE(std::abs(num - ana) / std::max({std::abs(num), std::abs(ana), 1e-6}), 1e-4)
          << m.params().at(k).name << "[" << i << "]";
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Cells, ModelByCell,
                         ::testing::Combine(::testing::Values(CellType::gru, CellType::lstm), ::testing::Values(1, 2)),
                         [](const auto& info) {
                           return std::string(to_string(std::get<0>(info.param))) + "_layers" +
                                  std::to_string(std::get<1>(info.param));
                         });

TEST(Model, TensorLayoutAndShapes) {
  TrainingConfig cfg;
  cfg.hidden_size = 8;
  Model m(cfg, {10, 2});
  const auto& P = m.params();
  EXPECT_EQ(P["rnn.l0.W_z"].rows(), 8);
  EXPECT_EQ(P["rnn.l0.W_z"].cols(), 15);
  EXPECT_EQ(P["rnn.l0.U_n"].cols(), 8);
  EXPECT_EQ(P["head.W1"].rows(), 4);
  EXPECT_EQ(P["head.W2"].rows(), 10);
  EXPECT_FALSE(P.contains("rnn.l0.W_i"));
  EXPECT_THROW(P["nope"], ContractViolation);
  EXPECT_EQ(P.size(), 13u);
  EXPECT_EQ(P.scalar_count(), 3u * (8 * 15 + 8 * 8 + 8) + 4 * 8 + 4 + 10 * 4 + 10);

  cfg.cell = CellType::lstm;
  cfg.num_layers = 2;
  Model l(cfg, {10, 2});
  EXPECT_EQ(l.params()["rnn.l1.W_o"].cols(), 8);
  EXPECT_EQ(l.params().size(), 2u * 12 + 4);
}

TEST(Model, InitializationIsBoundedAndSeeded) {
  TrainingConfig cfg;
  cfg.hidden_size = 16;
  Model a(cfg, {6, 1}), b(cfg, {6, 1}), c(cfg, {6, 1});
  a.initialize(5);
  b.initialize(5);
  c.initialize(6);
  for (std::size_t k = 0; k < a.params().size(); ++k) {
    EXPECT_EQ(a.params().at(k).value, b.params().at(k).value);
    EXPECT_LE(a.params().at(k).value.cwiseAbs().maxCoeff(), 0.25);
  }
  EXPECT_NE(a.params().at(0).value, c.params().at(0).value);
}

TEST(Model, OutputIsADistribution) {
  TrainingConfig cfg;
  cfg.hidden_size = 12;
  Model m(cfg, {20, 2});
  m.initialize(1);
  std::mt19937_64 rng(9);
  const auto d = m.forward(random_window(m.dims(), cfg.n_past, rng));
  EXPECT_NEAR(std::accumulate(d.probs.begin(), d.probs.end(), 0.0), 1.0, 1e-12);
  for (double p : d.probs) EXPECT_GT(p, 0.0);
}

TEST(Model, SoftmaxIsStableForHugeLogits) {
  TrainingConfig cfg;
  cfg.hidden_size = 4;
  cfg.n_past = 1;
  Model m(cfg, {3, 0});
  m.params()["head.b2"](1, 0) = 5000.0;
  const auto d = m.forward({{2, VectorXd::Zero(3)}});
  EXPECT_NEAR(d.probs[1], 1.0, 1e-12);
  EXPECT_TRUE(std::isfinite(cross_entropy(d, 0)));
  EXPECT_NEAR(cross_entropy(d, 0), -std::log(1e-12), 1e-9);
}

TEST(Model, RejectsBadWindows) {
  TrainingConfig cfg;
  cfg.hidden_size = 4;
  cfg.n_past = 2;
  Model m(cfg, {5, 1});
  const StepInput ok{2, VectorXd::Zero(4)};
  EXPECT_THROW(m.forward({ok}), ContractViolation);
  EXPECT_THROW(m.forward({ok, {5, VectorXd::Zero(4)}}), ContractViolation);
  EXPECT_THROW(m.forward({ok, {-1, VectorXd::Zero(4)}}), ContractViolation);
  EXPECT_THROW(m.forward({ok, {1, VectorXd::Zero(3)}}), ContractViolation);
  EXPECT_THROW(m.backward({ok, ok}, 5), ContractViolation);
  EXPECT_NO_THROW(m.forward({ok, ok}));
}

TEST(Model, AccumulateGradientSums) {
  TrainingConfig cfg;
  cfg.hidden_size = 4;
  cfg.n_past = 2;
  Model m(cfg, {5, 1});
  m.initialize(2);
  const Window w{{2, VectorXd::Zero(4)}, {3, VectorXd::Ones(4)}};
  ParameterSet acc = m.params().zeros_like();
  const double l1 = m.accumulate_gradient(w, 4, acc);
  const double l2 = m.accumulate_gradient(w, 4, acc);
  EXPECT_EQ(l1, l2);
  EXPECT_NEAR(l1, cross_entropy(m.forward(w), 4), 1e-15);
  const ParameterSet one = m.backward(w, 4);
  for (std::size_t k = 0; k < acc.size(); ++k) EXPECT_LE((acc.at(k).value - 2 * one.at(k).value).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Model, ConfigValidationAndJson) {
  TrainingConfig c;
  EXPECT_EQ(TrainingConfig::from_json(c.to_json()), c);
  for (auto breaker : std::vector<std::function<void(TrainingConfig&)>>{
           [](auto& x) { x.n_past = 0; }, [](auto& x) { x.hidden_size = 0; }, [](auto& x) { x.num_layers = 0; },
           [](auto& x) { x.learning_rate = 0; }, [](auto& x) { x.batch_size = 0; }, [](auto& x) { x.epochs = 0; },
           [](auto& x) { x.adam_beta2 = 1.0; }, [](auto& x) { x.adam_eps = 0; }}) {
    TrainingConfig bad;
    breaker(bad);
    EXPECT_THROW(bad.validate(), ContractViolation);
    EXPECT_THROW(Model(bad, {3, 0}), ContractViolation);
  }
  EXPECT_THROW(parse_cell_type("rnn"), ContractViolation);
  EXPECT_EQ(parse_cell_type("lstm"), CellType::lstm);
  EXPECT_THROW(Model(c, {0, 0}), ContractViolation);
}

TEST(Distribution, TopkOrdersByProbabilityThenIndex) {
  const PredictionDistribution d{{0.1, 0.3, 0.2, 0.3, 0.1}};
  const auto top = d.topk(3);
  ASSERT_EQ(top.size(), 3u);
  EXPECT_EQ(top[0].index, 1);
  EXPECT_EQ(top[1].index, 3);
  EXPECT_EQ(top[2].index, 2);
  EXPECT_EQ(d.topk(10).size(), 5u);
  EXPECT_EQ(d.topk(2, 2)[0].index, 3);
  EXPECT_TRUE(d.topk(0).empty());
  EXPECT_EQ(d.argmax(), 1);
  EXPECT_EQ(d.argmax(2), 3);
}

TEST(Distribution, FilterRenormalize) {
  const PredictionDistribution d{{0.5, 0.3, 0.2}};
  EXPECT_EQ(filter_renormalize(d, {1, 2}).probs, (std::vector<double>{0.0, 0.6, 0.4}));
  EXPECT_EQ(filter_renormalize(d, {0, 1, 2}).probs, d.probs);
  EXPECT_EQ(filter_renormalize(d, {2, 7, -1}).probs, (std::vector<double>{0.0, 0.0, 1.0}));
  EXPECT_THROW(filter_renormalize(d, {}), FilterError);
  EXPECT_THROW(filter_renormalize(PredictionDistribution{{1.0, 0.0}}, {1}), FilterError);
}

TEST(Distribution, FilterPreservesRelativeOrderRandomized) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    PredictionDistribution d;
    const int n = 2 + static_cast<int>(rng() % 20);
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += d.probs.emplace_back(unit_uniform(rng()) + 0.01);
    for (auto& p : d.probs) p /= s;
    std::set<int> keep;
    for (int i = 0; i < n; ++i)
      if (rng() % 3) keep.insert(i);
    if (keep.empty()) continue;
    const auto f = filter_renormalize(d, keep);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      total += f.probs[static_cast<std::size_t>(i)];
      if (!keep.count(i)) EXPECT_EQ(f.probs[static_cast<std::size_t>(i)], 0.0);
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
    for (int i : keep)
      for (int j : keep)
        if (d.probs[static_cast<std::size_t>(i)] < d.probs[static_cast<std::size_t>(j)])
          EXPECT_LT(f.probs[static_cast<std::size_t>(i)], f.probs[static_cast<std::size_t>(j)]);
  }
}

TEST(CrossEntropy, FloorsTinyProbabilities) {
  const PredictionDistribution d{{1.0, 0.0}};
  EXPECT_EQ(cross_entropy(d, 0), 0.0);
  EXPECT_NEAR(cross_entropy(d, 1), 27.631021115928547, 1e-12);
  EXPECT_THROW(cross_entropy(d, 2), ContractViolation);
}

TEST(UnitUniform, RangeAndResolution) {
  EXPECT_EQ(unit_uniform(0), 0.0);
  EXPECT_LT(unit_uniform(~0ULL), 1.0);
  EXPECT_EQ(unit_uniform(1ULL << 63), 0.5);
}
