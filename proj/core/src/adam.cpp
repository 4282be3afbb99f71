#include "acf/adam.hpp"

#include <cmath>

#include "acf/errors.hpp"

namespace acf {

AdamState AdamState::zeros_like(const ParameterSet& params) {
  return {params.zeros_like(), params.zeros_like(), 0};
}

void adam_step(ParameterSet& params, const ParameterSet& grads, AdamState& state, const AdamConfig& config) {
  if (grads.size() != params.size() || state.m.size() != params.size() || state.v.size() != params.size())
    throw ContractViolation("adam_step: tensor count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& p = params.at(i).value;
    const std::initializer_list<const Eigen::MatrixXd*> others{&grads.at(i).value, &state.m.at(i).value,
                                                               &state.v.at(i).value};
    for (const auto* other : others) {
      if (other->rows() != p.rows() || other->cols() != p.cols())
        throw ContractViolation("adam_step: shape mismatch for " + params.at(i).name);
    }
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(config.beta1, t);
  const double bc2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params.at(i).value;
    const auto& g = grads.at(i).value;
    auto& m = state.m.at(i).value;
    auto& v = state.v.at(i).value;
    m = config.beta1 * m + (1.0 - config.beta1) * g;
    v = config.beta2 * v + (1.0 - config.beta2) * g.cwiseProduct(g);
    p.array() -= config.learning_rate * (m.array() / bc1) / ((v.array() / bc2).sqrt() + config.eps);
  }
}

}  // namespace acf
