#pragma once

#include "batchlab/nn/graph.hpp"
#include "batchlab/nn/mlp.hpp"
#include "batchlab/policy/policy.hpp"

namespace batchlab::policy {

inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 2.0;

/// Diagonal Gaussian: trunk(state) is the mean, log_std (1×A) is state independent.
struct GaussianPolicyParams {
  nn::MlpParams trunk;
  nn::Tensor log_std;

  std::vector<nn::Tensor*> parameters();

  friend bool operator==(const GaussianPolicyParams&, const GaussianPolicyParams&) = default;
};

enum class SampleMode { mean, full };
std::string to_string(SampleMode m);
SampleMode sample_mode_from_string(const std::string& name);

/// Exact log density of `action` under N(mean(state), diag(std^2)), log_std clamped.
double gaussian_logprob(const GaussianPolicyParams& p, std::span<const double> state, std::span<const double> action);

/// Per-sample negative log likelihood, B×1. `log_std` is the bound 1×A parameter.
nn::Var gaussian_nll(nn::Graph& g, const nn::MlpBinding& trunk, nn::Var log_std, nn::Var states, nn::Var actions);

class GaussianPolicy final : public Policy {
 public:
  GaussianPolicy(GaussianPolicyParams params, ActionBounds bounds, SampleMode mode);

  std::size_t state_dim() const override { return params_.trunk.input_dim(); }
  const ActionBounds& bounds() const override { return bounds_; }
  /// mode=mean returns the mean in every row; mode=full adds std * N(0,1) noise.
  nn::Tensor sample(std::span<const double> state, std::size_t n, std::uint64_t seed) const override;

  nn::Tensor mean(std::span<const double> state) const;
  std::vector<double> std_dev() const;
  double log_prob(std::span<const double> state, std::span<const double> action) const {
    return gaussian_logprob(params_, state, action);
  }

  SampleMode mode() const { return mode_; }
  void set_mode(SampleMode m) { mode_ = m; }
  GaussianPolicyParams& params() { return params_; }
  const GaussianPolicyParams& params() const { return params_; }

 private:
  GaussianPolicyParams params_;
  ActionBounds bounds_;
  SampleMode mode_;
};

}  // namespace batchlab::policy
