#include "acf/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <nlohmann/json.hpp>

#include "acf/errors.hpp"

namespace acf {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd sigmoid(const VectorXd& a) { return (1.0 + (-a.array()).exp()).inverse().matrix(); }
VectorXd tanh_v(const VectorXd& a) { return a.array().tanh().matrix(); }

constexpr double kProbFloor = 1e-12;

}  // namespace

// ---------------------------------------------------------------- config

std::string_view to_string(CellType cell) { return cell == CellType::gru ? "gru" : "lstm"; }

CellType parse_cell_type(std::string_view text) {
  if (text == "gru" || text == "GRU") return CellType::gru;
  if (text == "lstm" || text == "LSTM") return CellType::lstm;
  throw ContractViolation("unknown cell type '" + std::string(text) + "'");
}

void TrainingConfig::validate() const {
  if (n_past < 1) throw ContractViolation("n_past must be >= 1");
  if (hidden_size < 1) throw ContractViolation("hidden_size must be >= 1");
  if (num_layers < 1) throw ContractViolation("num_layers must be >= 1");
  if (!(learning_rate > 0)) throw ContractViolation("learning_rate must be > 0");
  if (batch_size < 1) throw ContractViolation("batch_size must be >= 1");
  if (epochs < 1) throw ContractViolation("epochs must be >= 1");
  if (!(adam_beta1 >= 0 && adam_beta1 < 1 && adam_beta2 >= 0 && adam_beta2 < 1 && adam_eps > 0))
    throw ContractViolation("invalid Adam hyperparameters");
}

nlohmann::json TrainingConfig::to_json() const {
  return {{"cell", std::string(to_string(cell))},
          {"n_past", n_past},
          {"hidden_size", hidden_size},
          {"num_layers", num_layers},
          {"learning_rate", learning_rate},
          {"adam_beta1", adam_beta1},
          {"adam_beta2", adam_beta2},
          {"adam_eps", adam_eps},
          {"batch_size", batch_size},
          {"epochs", epochs},
          {"seed", seed}};
}

TrainingConfig TrainingConfig::from_json(const nlohmann::json& j) {
  TrainingConfig c;
  c.cell = parse_cell_type(j.at("cell").get<std::string>());
  c.n_past = j.at("n_past").get<int>();
  c.hidden_size = j.at("hidden_size").get<int>();
  c.num_layers = j.at("num_layers").get<int>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.adam_beta1 = j.at("adam_beta1").get<double>();
  c.adam_beta2 = j.at("adam_beta2").get<double>();
  c.adam_eps = j.at("adam_eps").get<double>();
  c.batch_size = j.at("batch_size").get<int>();
  c.epochs = j.at("epochs").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.validate();
  return c;
}

VectorXd to_dense(const StepInput& step, const ModelDims& dims) {
  VectorXd x = VectorXd::Zero(dims.input_size());
  x(step.action) = 1.0;
  x.tail(dims.context_size()) = step.context;
  return x;
}

// ---------------------------------------------------------- parameter set

MatrixXd& ParameterSet::add(std::string name, Eigen::Index rows, Eigen::Index cols) {
  tensors_.push_back({std::move(name), MatrixXd::Zero(rows, cols)});
  return tensors_.back().value;
}

MatrixXd& ParameterSet::operator[](std::string_view name) {
  for (auto& t : tensors_)
    if (t.name == name) return t.value;
  throw ContractViolation("no tensor named '" + std::string(name) + "'");
}

const MatrixXd& ParameterSet::operator[](std::string_view name) const {
  for (const auto& t : tensors_)
    if (t.name == name) return t.value;
  throw ContractViolation("no tensor named '" + std::string(name) + "'");
}

bool ParameterSet::contains(std::string_view name) const {
  return std::any_of(tensors_.begin(), tensors_.end(), [&](const Tensor& t) { return t.name == name; });
}

ParameterSet ParameterSet::zeros_like() const {
  ParameterSet out;
  for (const auto& t : tensors_) out.add(t.name, t.value.rows(), t.value.cols());
  return out;
}

void ParameterSet::set_zero() {
  for (auto& t : tensors_) t.value.setZero();
}

bool ParameterSet::all_finite() const {
  return std::all_of(tensors_.begin(), tensors_.end(), [](const Tensor& t) { return t.value.allFinite(); });
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors_) n += static_cast<std::size_t>(t.value.size());
  return n;
}

// ------------------------------------------------------------------ cells

namespace {

struct StepCache {
  VectorXd h_prev, c_prev;
  VectorXd z, r, n, un;          // GRU
  VectorXd i, f, g, o, tanh_c;   // LSTM
  VectorXd h, c;
};

/// GRU step from precomputed input projections (W x + b per gate).
void gru_step(const MatrixXd& U_z, const MatrixXd& U_r, const MatrixXd& U_n, const VectorXd& ax_z,
              const VectorXd& ax_r, const VectorXd& ax_n, const VectorXd& h, StepCache& s) {
  s.h_prev = h;
  s.z = sigmoid(ax_z + U_z * h);
  s.r = sigmoid(ax_r + U_r * h);
  s.un = U_n * h;
  s.n = tanh_v(ax_n + s.r.cwiseProduct(s.un));
  s.h = (1.0 - s.z.array()).matrix().cwiseProduct(s.n) + s.z.cwiseProduct(h);
}

void lstm_step(const MatrixXd& U_i, const MatrixXd& U_f, const MatrixXd& U_g, const MatrixXd& U_o,
               const VectorXd& ax_i, const VectorXd& ax_f, const VectorXd& ax_g, const VectorXd& ax_o,
               const VectorXd& h, const VectorXd& c, StepCache& s) {
  s.h_prev = h;
  s.c_prev = c;
  s.i = sigmoid(ax_i + U_i * h);
  s.f = sigmoid(ax_f + U_f * h);
  s.g = tanh_v(ax_g + U_g * h);
  s.o = sigmoid(ax_o + U_o * h);
  s.c = s.f.cwiseProduct(c) + s.i.cwiseProduct(s.g);
  s.tanh_c = tanh_v(s.c);
  s.h = s.o.cwiseProduct(s.tanh_c);
}

}  // namespace

VectorXd gru_forward(const GruParams& p, const VectorXd& x, const VectorXd& h) {
  StepCache s;
  gru_step(p.U_z, p.U_r, p.U_n, p.W_z * x + p.b_z, p.W_r * x + p.b_r, p.W_n * x + p.b_n, h, s);
  return s.h;
}

std::pair<VectorXd, VectorXd> lstm_forward(const LstmParams& p, const VectorXd& x, const VectorXd& h,
                                           const VectorXd& c) {
  StepCache s;
  lstm_step(p.U_i, p.U_f, p.U_g, p.U_o, p.W_i * x + p.b_i, p.W_f * x + p.b_f, p.W_g * x + p.b_g,
            p.W_o * x + p.b_o, h, c, s);
  return {s.h, s.c};
}

// ------------------------------------------------------------ distribution

std::vector<RankedIndex> PredictionDistribution::topk(int k, int first_index) const {
  std::vector<RankedIndex> all;
  for (int i = std::max(0, first_index); i < static_cast<int>(probs.size()); ++i)
    all.push_back({i, probs[static_cast<std::size_t>(i)]});
  const auto n = std::min<std::size_t>(static_cast<std::size_t>(std::max(k, 0)), all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n), all.end(),
                    [](const RankedIndex& a, const RankedIndex& b) {
                      return a.prob != b.prob ? a.prob > b.prob : a.index < b.index;
                    });
  all.resize(n);
  return all;
}

int PredictionDistribution::argmax(int first_index) const {
  int best = -1;
  for (int i = std::max(0, first_index); i < static_cast<int>(probs.size()); ++i) {
    if (best < 0 || probs[static_cast<std::size_t>(i)] > probs[static_cast<std::size_t>(best)]) best = i;
  }
  return best;
}

double cross_entropy(const PredictionDistribution& dist, int target) {
  if (target < 0 || target >= static_cast<int>(dist.probs.size()))
    throw ContractViolation("cross_entropy: target out of range");
  return -std::log(std::max(dist.probs[static_cast<std::size_t>(target)], kProbFloor));
}

PredictionDistribution filter_renormalize(const PredictionDistribution& dist, const std::set<int>& keep) {
  PredictionDistribution out;
  out.probs.assign(dist.probs.size(), 0.0);
  double mass = 0.0;
  for (int i : keep) {
    if (i < 0 || i >= static_cast<int>(dist.probs.size())) continue;
    mass += dist.probs[static_cast<std::size_t>(i)];
  }
  if (!(mass > 0.0)) throw FilterError("filter keeps zero probability mass");
  for (int i : keep) {
    if (i < 0 || i >= static_cast<int>(dist.probs.size())) continue;
    out.probs[static_cast<std::size_t>(i)] = dist.probs[static_cast<std::size_t>(i)] / mass;
  }
  return out;
}

// ------------------------------------------------------------------- model

struct Model::Trace {
  std::vector<std::vector<StepCache>> layers;
  VectorXd y;
  PredictionDistribution dist;
};

Model::Model(TrainingConfig config, ModelDims dims) : config_(config), dims_(dims) {
  config_.validate();
  if (dims_.vocab_size < 1 || dims_.app_count < 0) throw ContractViolation("invalid model dimensions");
  const int H = config_.hidden_size;
  const char* gru_gates[] = {"z", "r", "n"};
  const char* lstm_gates[] = {"i", "f", "g", "o"};
  const int G = gate_count();
  for (int l = 0; l < config_.num_layers; ++l) {
    const std::string prefix = "rnn.l" + std::to_string(l) + ".";
    const int in = l == 0 ? dims_.input_size() : H;
    LayerSlots slots;
    slots.W = params_.size();
    for (int g = 0; g < G; ++g)
      params_.add(prefix + "W_" + (G == 3 ? gru_gates[g] : lstm_gates[g]), H, in);
    slots.U = params_.size();
    for (int g = 0; g < G; ++g)
      params_.add(prefix + "U_" + (G == 3 ? gru_gates[g] : lstm_gates[g]), H, H);
    slots.b = params_.size();
    for (int g = 0; g < G; ++g)
      params_.add(prefix + "b_" + (G == 3 ? gru_gates[g] : lstm_gates[g]), H, 1);
    layers_.push_back(slots);
  }
  head_ = params_.size();
  const int M = config_.head_size();
  params_.add("head.W1", M, H);
  params_.add("head.b1", M, 1);
  params_.add("head.W2", dims_.vocab_size, M);
  params_.add("head.b2", dims_.vocab_size, 1);
}

double unit_uniform(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

void Model::initialize(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(config_.hidden_size));
  for (auto& t : params_) {
    for (Eigen::Index c = 0; c < t.value.cols(); ++c)
      for (Eigen::Index r = 0; r < t.value.rows(); ++r) t.value(r, c) = (2.0 * unit_uniform(rng()) - 1.0) * bound;
  }
}

void Model::check_window(const Window& window) const {
  if (static_cast<int>(window.size()) != config_.n_past)
    throw ContractViolation("window length " + std::to_string(window.size()) + " != n_past " +
                            std::to_string(config_.n_past));
  for (const auto& s : window) {
    if (s.action < 0 || s.action >= dims_.vocab_size)
      throw ContractViolation("window action index " + std::to_string(s.action) + " out of range");
    if (s.context.size() != dims_.context_size())
      throw ContractViolation("context block has length " + std::to_string(s.context.size()) +
                              ", expected " + std::to_string(dims_.context_size()));
  }
}

void Model::run(const Window& window, Trace& trace) const {
  const int H = config_.hidden_size;
  const int G = gate_count();
  const int C = dims_.context_size();
  const auto T = window.size();
  trace.layers.assign(layers_.size(), std::vector<StepCache>(T));

  std::vector<VectorXd> ax(static_cast<std::size_t>(G));
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const LayerSlots& s = layers_[l];
    VectorXd h = VectorXd::Zero(H);
    VectorXd c = VectorXd::Zero(H);
    for (std::size_t t = 0; t < T; ++t) {
      for (int g = 0; g < G; ++g) {
        const MatrixXd& W = params_.at(s.W + static_cast<std::size_t>(g)).value;
        const MatrixXd& b = params_.at(s.b + static_cast<std::size_t>(g)).value;
        if (l == 0) {
          ax[static_cast<std::size_t>(g)] = W.col(window[t].action) + W.rightCols(C) * window[t].context + b.col(0);
        } else {
          ax[static_cast<std::size_t>(g)] = W * trace.layers[l - 1][t].h + b.col(0);
        }
      }
      StepCache& cache = trace.layers[l][t];
      const auto U = [&](int g) -> const MatrixXd& { return params_.at(s.U + static_cast<std::size_t>(g)).value; };
      if (config_.cell == CellType::gru) {
        gru_step(U(0), U(1), U(2), ax[0], ax[1], ax[2], h, cache);
      } else {
        lstm_step(U(0), U(1), U(2), U(3), ax[0], ax[1], ax[2], ax[3], h, c, cache);
        c = cache.c;
      }
      h = cache.h;
    }
  }

  const VectorXd& h_top = trace.layers.back().back().h;
  const MatrixXd& W1 = params_.at(head_).value;
  const MatrixXd& b1 = params_.at(head_ + 1).value;
  const MatrixXd& W2 = params_.at(head_ + 2).value;
  const MatrixXd& b2 = params_.at(head_ + 3).value;
  trace.y = tanh_v(W1 * h_top + b1.col(0));
  VectorXd logits = W2 * trace.y + b2.col(0);
  const double top = logits.maxCoeff();
  VectorXd e = (logits.array() - top).exp().matrix();
  e /= e.sum();
  trace.dist.probs.assign(e.data(), e.data() + e.size());
}

PredictionDistribution Model::forward(const Window& window) const {
  check_window(window);
  Trace trace;
  run(window, trace);
  return std::move(trace.dist);
}

double Model::accumulate_gradient(const Window& window, int target, ParameterSet& grad) const {
  check_window(window);
  if (target < 0 || target >= dims_.vocab_size) throw ContractViolation("target index out of range");
  Trace trace;
  run(window, trace);
  const double loss = cross_entropy(trace.dist, target);

  const int H = config_.hidden_size;
  const int G = gate_count();
  const int C = dims_.context_size();
  const auto T = window.size();

  // Head.
  VectorXd dlogits = Eigen::Map<const VectorXd>(trace.dist.probs.data(), dims_.vocab_size);
  dlogits(target) -= 1.0;
  const VectorXd& h_top = trace.layers.back().back().h;
  const MatrixXd& W1 = params_.at(head_).value;
  const MatrixXd& W2 = params_.at(head_ + 2).value;
  grad.at(head_ + 2).value.noalias() += dlogits * trace.y.transpose();
  grad.at(head_ + 3).value.col(0) += dlogits;
  const VectorXd da1 = (W2.transpose() * dlogits).cwiseProduct((1.0 - trace.y.array().square()).matrix());
  grad.at(head_).value.noalias() += da1 * h_top.transpose();
  grad.at(head_ + 1).value.col(0) += da1;

  // Gradient flowing into each layer's output at each step.
  std::vector<VectorXd> dh_out(T, VectorXd::Zero(H));
  dh_out[T - 1] = W1.transpose() * da1;

  std::vector<VectorXd> da(static_cast<std::size_t>(G));
  for (std::size_t li = layers_.size(); li-- > 0;) {
    const LayerSlots& s = layers_[li];
    const auto U = [&](int g) -> const MatrixXd& { return params_.at(s.U + static_cast<std::size_t>(g)).value; };
    const auto W = [&](int g) -> const MatrixXd& { return params_.at(s.W + static_cast<std::size_t>(g)).value; };
    std::vector<VectorXd> dx_lower(T, VectorXd::Zero(H));
    VectorXd dh_next = VectorXd::Zero(H);
    VectorXd dc_next = VectorXd::Zero(H);

    for (std::size_t t = T; t-- > 0;) {
      const StepCache& sc = trace.layers[li][t];
      const VectorXd dh = dh_out[t] + dh_next;
      VectorXd dh_prev;
      if (config_.cell == CellType::gru) {
        const VectorXd dn = dh.cwiseProduct((1.0 - sc.z.array()).matrix());
        const VectorXd dz = dh.cwiseProduct(sc.h_prev - sc.n);
        dh_prev = dh.cwiseProduct(sc.z);
        da[2] = dn.cwiseProduct((1.0 - sc.n.array().square()).matrix());
        const VectorXd dr = da[2].cwiseProduct(sc.un);
        const VectorXd dun = da[2].cwiseProduct(sc.r);
        da[1] = dr.cwiseProduct((sc.r.array() * (1.0 - sc.r.array())).matrix());
        da[0] = dz.cwiseProduct((sc.z.array() * (1.0 - sc.z.array())).matrix());
        grad.at(s.U + 2).value.noalias() += dun * sc.h_prev.transpose();
        grad.at(s.U + 1).value.noalias() += da[1] * sc.h_prev.transpose();
        grad.at(s.U + 0).value.noalias() += da[0] * sc.h_prev.transpose();
        dh_prev.noalias() += U(2).transpose() * dun;
        dh_prev.noalias() += U(1).transpose() * da[1];
        dh_prev.noalias() += U(0).transpose() * da[0];
      } else {
        const VectorXd d_o = dh.cwiseProduct(sc.tanh_c);
        const VectorXd dc =
            dc_next + dh.cwiseProduct(sc.o).cwiseProduct((1.0 - sc.tanh_c.array().square()).matrix());
        da[0] = dc.cwiseProduct(sc.g).cwiseProduct((sc.i.array() * (1.0 - sc.i.array())).matrix());
        da[1] = dc.cwiseProduct(sc.c_prev).cwiseProduct((sc.f.array() * (1.0 - sc.f.array())).matrix());
        da[2] = dc.cwiseProduct(sc.i).cwiseProduct((1.0 - sc.g.array().square()).matrix());
        da[3] = d_o.cwiseProduct((sc.o.array() * (1.0 - sc.o.array())).matrix());
        dc_next = dc.cwiseProduct(sc.f);
        dh_prev = VectorXd::Zero(H);
        for (int g = 0; g < 4; ++g) {
          grad.at(s.U + static_cast<std::size_t>(g)).value.noalias() += da[static_cast<std::size_t>(g)] * sc.h_prev.transpose();
          dh_prev.noalias() += U(g).transpose() * da[static_cast<std::size_t>(g)];
        }
      }

      for (int g = 0; g < G; ++g) {
        const VectorXd& d = da[static_cast<std::size_t>(g)];
        grad.at(s.b + static_cast<std::size_t>(g)).value.col(0) += d;
        MatrixXd& dW = grad.at(s.W + static_cast<std::size_t>(g)).value;
        if (li == 0) {
          dW.col(window[t].action) += d;
          dW.rightCols(C).noalias() += d * window[t].context.transpose();
        } else {
          dW.noalias() += d * trace.layers[li - 1][t].h.transpose();
          dx_lower[t].noalias() += W(g).transpose() * d;
        }
      }
      dh_next = std::move(dh_prev);
    }
    dh_out = std::move(dx_lower);
  }
  return loss;
}

ParameterSet Model::backward(const Window& window, int target) const {
  ParameterSet grad = params_.zeros_like();
  accumulate_gradient(window, target, grad);
  return grad;
}

}  // namespace acf
