#include "batchlab/policy/gaussian.hpp"

#include "batchlab/common/error.hpp"
#include "batchlab/common/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace batchlab::policy {

namespace {

const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

}  // namespace

std::vector<nn::Tensor*> GaussianPolicyParams::parameters() {
  auto out = trunk.parameters();
  out.push_back(&log_std);
  return out;
}

std::string to_string(SampleMode m) { return m == SampleMode::mean ? "mean" : "full"; }

SampleMode sample_mode_from_string(const std::string& name) {
  if (name == "mean") return SampleMode::mean;
  if (name == "full") return SampleMode::full;
  throw Error("unknown sample mode '" + name + "'");
}

double gaussian_logprob(const GaussianPolicyParams& p, std::span<const double> state, std::span<const double> action) {
  const nn::Tensor mu = p.trunk.forward(nn::Tensor::row(state));
  if (action.size() != mu.cols()) throw ShapeError("gaussian_logprob: action dimension mismatch");
  double lp = 0.0;
  for (std::size_t d = 0; d < action.size(); ++d) {
    const double ls = std::clamp(p.log_std[d], kLogStdMin, kLogStdMax);
    const double z = (action[d] - mu[d]) / std::exp(ls);
    lp += -0.5 * z * z - ls - kHalfLog2Pi;
  }
  return lp;
}

nn::Var gaussian_nll(nn::Graph& g, const nn::MlpBinding& trunk, nn::Var log_std, nn::Var states, nn::Var actions) {
  const nn::Var mean = nn::forward(g, trunk, states);
  const nn::Var ls = g.clamp(log_std, kLogStdMin, kLogStdMax);
  const nn::Var inv_std = g.exp(g.scale(ls, -1.0));
  const nn::Var z = g.mul_row(g.sub(actions, mean), inv_std);
  const double action_dim = static_cast<double>(g.value(actions).cols());
  const nn::Var quad = g.scale(g.sum_cols(g.square(z)), 0.5);
  const nn::Var log_norm = g.shift(g.sum_cols(ls), action_dim * kHalfLog2Pi);
  return g.add_row(quad, log_norm);
}

GaussianPolicy::GaussianPolicy(GaussianPolicyParams params, ActionBounds bounds, SampleMode mode)
    : params_(std::move(params)), bounds_(std::move(bounds)), mode_(mode) {
  if (params_.trunk.output_dim() != bounds_.dim() || params_.log_std.cols() != bounds_.dim())
    throw ShapeError("GaussianPolicy: mean/log_std width must equal action_dim");
}

nn::Tensor GaussianPolicy::mean(std::span<const double> state) const { return params_.trunk.forward(nn::Tensor::row(state)); }

std::vector<double> GaussianPolicy::std_dev() const {
  std::vector<double> s;
  for (double ls : params_.log_std.values()) s.push_back(std::exp(std::clamp(ls, kLogStdMin, kLogStdMax)));
  return s;
}

nn::Tensor GaussianPolicy::sample(std::span<const double> state, std::size_t n, std::uint64_t seed) const {
  const nn::Tensor mu = mean(state);
  const auto sd = std_dev();
  const std::size_t dim = bounds_.dim();
  nn::Tensor out = nn::Tensor::matrix(n, dim);
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t d = 0; d < dim; ++d) {
      double a = mu[d];
      if (mode_ == SampleMode::full) a += sd[d] * rng.normal();
      out.at(i, d) = bounds_.clip(a, d);
    }
  }
  return out;
}

}  // namespace batchlab::policy
