#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

namespace acf {

enum class CellType { gru, lstm };

std::string_view to_string(CellType cell);
CellType parse_cell_type(std::string_view text);

/// Hyperparameters of the forecaster and its optimizer. Defaults follow the
/// reference configuration: 5 past actions, 600 hidden features, one layer,
/// Adam with learning rate 1e-3.
struct TrainingConfig {
  CellType cell = CellType::gru;
  int n_past = 5;
  int hidden_size = 600;
  int num_layers = 1;
  double learning_rate = 0.001;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  int batch_size = 32;
  int epochs = 10;
  std::uint64_t seed = 1;

  /// Throws ContractViolation when an invariant is broken.
  void validate() const;
  int head_size() const { return hidden_size / 2 > 0 ? hidden_size / 2 : 1; }

  nlohmann::json to_json() const;
  static TrainingConfig from_json(const nlohmann::json& j);
  friend bool operator==(const TrainingConfig&, const TrainingConfig&) = default;
};

/// Sizes derived from the vocabulary: V action classes and A applications.
/// A feature vector is [action one-hot (V) | app one-hot (A) | rel_x | rel_y | elapsed].
struct ModelDims {
  int vocab_size = 0;
  int app_count = 0;

  int context_size() const { return app_count + 3; }
  int input_size() const { return vocab_size + context_size(); }
  friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

/// One time step of the input window in sparse form: the action index plus
/// the dense context block.
struct StepInput {
  int action = 0;
  Eigen::VectorXd context;
};

using Window = std::vector<StepInput>;

/// Dense feature vector of a step (for tests and inspection).
Eigen::VectorXd to_dense(const StepInput& step, const ModelDims& dims);

struct Tensor {
  std::string name;
  Eigen::MatrixXd value;
};

/// Ordered collection of named tensors (parameters, gradients, moments).
class ParameterSet {
 public:
  Eigen::MatrixXd& add(std::string name, Eigen::Index rows, Eigen::Index cols);

  std::size_t size() const { return tensors_.size(); }
  Tensor& at(std::size_t i) { return tensors_[i]; }
  const Tensor& at(std::size_t i) const { return tensors_[i]; }
  Eigen::MatrixXd& operator[](std::string_view name);
  const Eigen::MatrixXd& operator[](std::string_view name) const;
  bool contains(std::string_view name) const;

  ParameterSet zeros_like() const;
  void set_zero();
  bool all_finite() const;
  std::size_t scalar_count() const;

  auto begin() { return tensors_.begin(); }
  auto end() { return tensors_.end(); }
  auto begin() const { return tensors_.begin(); }
  auto end() const { return tensors_.end(); }

 private:
  std::vector<Tensor> tensors_;
};

struct GruParams {
  Eigen::MatrixXd W_z, W_r, W_n;  // hidden x input
  Eigen::MatrixXd U_z, U_r, U_n;  // hidden x hidden
  Eigen::VectorXd b_z, b_r, b_n;
};

struct LstmParams {
  Eigen::MatrixXd W_i, W_f, W_g, W_o;
  Eigen::MatrixXd U_i, U_f, U_g, U_o;
  Eigen::VectorXd b_i, b_f, b_g, b_o;
};

/// z = s(W_z x + U_z h + b_z), r = s(W_r x + U_r h + b_r),
/// n = tanh(W_n x + r * (U_n h) + b_n), h' = (1 - z) * n + z * h.
Eigen::VectorXd gru_forward(const GruParams& p, const Eigen::VectorXd& x, const Eigen::VectorXd& h);

/// i, f, o = s(...), g = tanh(...), c' = f * c + i * g, h' = o * tanh(c').
std::pair<Eigen::VectorXd, Eigen::VectorXd> lstm_forward(const LstmParams& p, const Eigen::VectorXd& x,
                                                         const Eigen::VectorXd& h,
                                                         const Eigen::VectorXd& c);

struct RankedIndex {
  int index = 0;
  double prob = 0.0;
};

struct PredictionDistribution {
  std::vector<double> probs;

  /// The k most probable indices, by descending probability then ascending
  /// index. Reserved indices below `first_index` are skipped.
  std::vector<RankedIndex> topk(int k, int first_index = 0) const;
  /// Highest-probability index at or above `first_index` (ties: lowest index).
  int argmax(int first_index = 0) const;
};

/// -ln(max(p[target], 1e-12)).
double cross_entropy(const PredictionDistribution& dist, int target);

/// Zeroes every entry outside `keep` and rescales the rest to sum to 1.
/// Throws FilterError when the kept mass is zero.
PredictionDistribution filter_renormalize(const PredictionDistribution& dist, const std::set<int>& keep);

/// Recurrent forecaster: a GRU or LSTM stack run over the window from a zero
/// state, followed by a one-hidden-layer tanh MLP and a softmax over the
/// action vocabulary.
class Model {
 public:
  Model(TrainingConfig config, ModelDims dims);

  /// Uniform in +-1/sqrt(hidden_size) for every tensor.
  void initialize(std::uint64_t seed);

  const TrainingConfig& config() const { return config_; }
  const ModelDims& dims() const { return dims_; }
  const ParameterSet& params() const { return params_; }
  ParameterSet& params() { return params_; }

  /// Throws ContractViolation on a window of the wrong length or shape.
  PredictionDistribution forward(const Window& window) const;

  /// Cross-entropy of `target` under forward(window); adds the exact
  /// gradient of that loss to `grad` (same layout as params()).
  double accumulate_gradient(const Window& window, int target, ParameterSet& grad) const;

  /// Convenience: fresh gradient set for a single example.
  ParameterSet backward(const Window& window, int target) const;

 private:
  struct LayerSlots {
    std::size_t W = 0;  // first input weight; gates follow consecutively
    std::size_t U = 0;
    std::size_t b = 0;
  };
  struct Trace;

  int gate_count() const { return config_.cell == CellType::gru ? 3 : 4; }
  void check_window(const Window& window) const;
  void run(const Window& window, Trace& trace) const;

  TrainingConfig config_;
  ModelDims dims_;
  ParameterSet params_;
  std::vector<LayerSlots> layers_;
  std::size_t head_ = 0;
};

/// Uniform [0, 1) double from a 64-bit engine output; stable across platforms.
double unit_uniform(std::uint64_t bits);

}  // namespace acf
