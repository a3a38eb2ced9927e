#include "batchlab/policy/diffusion.hpp"

#include "batchlab/common/error.hpp"

#include <algorithm>
#include <cmath>

namespace batchlab::policy {

DiffusionSchedule DiffusionSchedule::linear(int steps, double beta_start, double beta_end) {
  if (steps < 1) throw Error("diffusion schedule needs at least one step");
  if (!(beta_start > 0.0 && beta_start < beta_end && beta_end < 1.0))
    throw Error("diffusion schedule requires 0 < beta_start < beta_end < 1");
  DiffusionSchedule s;
  s.steps = steps;
  s.beta_start = beta_start;
  s.beta_end = beta_end;
  s.beta.assign(static_cast<std::size_t>(steps) + 1, 0.0);
  s.alpha.assign(s.beta.size(), 1.0);
  s.alpha_bar.assign(s.beta.size(), 1.0);
  for (int t = 1; t <= steps; ++t) {
    const double frac = steps == 1 ? 0.0 : static_cast<double>(t - 1) / (steps - 1);
    s.beta[t] = beta_start + frac * (beta_end - beta_start);
    s.alpha[t] = 1.0 - s.beta[t];
    s.alpha_bar[t] = s.alpha_bar[t - 1] * s.alpha[t];
  }
  return s;
}

std::vector<double> timestep_embedding(int t) {
  constexpr std::size_t half = kTimeEmbeddingDim / 2;
  std::vector<double> e(kTimeEmbeddingDim);
  for (std::size_t i = 0; i < half; ++i) {
    const double freq = std::exp(-std::log(10000.0) * static_cast<double>(i) / half);
    e[i] = std::sin(t * freq);
    e[half + i] = std::cos(t * freq);
  }
  return e;
}

namespace {

void fill_input_row(nn::Tensor& input, std::size_t row, std::span<const double> state, std::span<const double> noisy,
                    const std::vector<double>& emb) {
  auto dst = input.row_span(row);
  std::copy(state.begin(), state.end(), dst.begin());
  std::copy(noisy.begin(), noisy.end(), dst.begin() + static_cast<std::ptrdiff_t>(state.size()));
  std::copy(emb.begin(), emb.end(), dst.begin() + static_cast<std::ptrdiff_t>(state.size() + noisy.size()));
}

}  // namespace

DiffusionBatch make_diffusion_batch(const DiffusionSchedule& schedule, const nn::Tensor& states,
                                    const nn::Tensor& normalized_actions, Rng& rng) {
  const std::size_t rows = states.rows();
  const std::size_t adim = normalized_actions.cols();
  if (normalized_actions.rows() != rows) throw ShapeError("make_diffusion_batch: state/action row mismatch");
  DiffusionBatch b;
  b.t.resize(rows);
  b.eps = nn::Tensor::matrix(rows, adim);
  b.noisy = nn::Tensor::matrix(rows, adim);
  b.input = nn::Tensor::matrix(rows, states.cols() + adim + kTimeEmbeddingDim);
  for (std::size_t i = 0; i < rows; ++i) {
    const int t = 1 + static_cast<int>(rng.index(static_cast<std::size_t>(schedule.steps)));
    b.t[i] = t;
    const double sa = std::sqrt(schedule.alpha_bar[t]);
    const double sn = std::sqrt(1.0 - schedule.alpha_bar[t]);
    for (std::size_t d = 0; d < adim; ++d) {
      const double e = rng.normal();
      b.eps.at(i, d) = e;
      b.noisy.at(i, d) = sa * normalized_actions.at(i, d) + sn * e;
    }
    fill_input_row(b.input, i, states.row_span(i), b.noisy.row_span(i), timestep_embedding(t));
  }
  return b;
}

double diffusion_loss_value(const DiffusionBatch& batch, const nn::Tensor& predicted) {
  if (!predicted.same_shape(batch.eps)) throw ShapeError("diffusion loss: prediction shape mismatch");
  return (batch.eps.mat() - predicted.mat()).rowwise().squaredNorm().mean();
}

nn::Var diffusion_per_sample_loss(nn::Graph& g, const nn::MlpBinding& eps_net, const DiffusionBatch& batch) {
  const nn::Var pred = nn::forward(g, eps_net, g.input(batch.input));
  return g.sum_cols(g.square(g.sub(g.input(batch.eps), pred)));
}

double diffusion_train_loss(const DiffusionPolicyParams& p, const nn::Tensor& states,
                            const nn::Tensor& normalized_actions, std::uint64_t seed) {
  Rng rng(seed);
  const auto batch = make_diffusion_batch(p.schedule, states, normalized_actions, rng);
  return diffusion_loss_value(batch, p.eps_net.forward(batch.input));
}

DiffusionPolicy::DiffusionPolicy(DiffusionPolicyParams params, ActionBounds bounds, bool clip_x0)
    : params_(std::move(params)), bounds_(std::move(bounds)), clip_x0_(clip_x0) {
  if (params_.eps_net.output_dim() != bounds_.dim())
    throw ShapeError("DiffusionPolicy: eps_net output width must equal action_dim");
  if (params_.eps_net.input_dim() <= bounds_.dim() + kTimeEmbeddingDim)
    throw ShapeError("DiffusionPolicy: eps_net input too narrow");
  if (params_.schedule.steps < 1) throw Error("DiffusionPolicy: empty schedule");
}

nn::Tensor DiffusionPolicy::sample(std::span<const double> state, std::size_t n, std::uint64_t seed) const {
  if (state.size() != state_dim()) throw ShapeError("DiffusionPolicy: state dimension mismatch");
  const auto& s = params_.schedule;
  const std::size_t adim = bounds_.dim();
  Rng rng(seed);
  nn::Tensor x = nn::Tensor::matrix(n, adim);
  for (double& v : x.values()) v = rng.normal();
  nn::Tensor input = nn::Tensor::matrix(n, state.size() + adim + kTimeEmbeddingDim);
  for (int t = s.steps; t >= 1; --t) {
    const auto emb = timestep_embedding(t);
    for (std::size_t i = 0; i < n; ++i) fill_input_row(input, i, state, x.row_span(i), emb);
    const nn::Tensor eps = params_.eps_net.forward(input);
    const double ab = s.alpha_bar[t];
    const double ab_prev = s.alpha_bar[t - 1];
    const double coef_x0 = s.beta[t] * std::sqrt(ab_prev) / (1.0 - ab);
    const double coef_xt = (1.0 - ab_prev) * std::sqrt(s.alpha[t]) / (1.0 - ab);
    const double post_sd = std::sqrt(s.beta[t] * (1.0 - ab_prev) / (1.0 - ab));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t d = 0; d < adim; ++d) {
        double x0 = (x.at(i, d) - std::sqrt(1.0 - ab) * eps.at(i, d)) / std::sqrt(ab);
        if (clip_x0_) x0 = std::clamp(x0, -1.0, 1.0);
        double next = coef_x0 * x0 + coef_xt * x.at(i, d);
        if (t > 1) next += post_sd * rng.normal();
        x.at(i, d) = next;
      }
    }
    if (!x.all_finite()) throw NumericError("diffusion reverse chain produced a non-finite value at t=" + std::to_string(t));
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t d = 0; d < adim; ++d) x.at(i, d) = bounds_.clip(bounds_.denormalize(std::clamp(x.at(i, d), -1.0, 1.0), d), d);
  return x;
}

}  // namespace batchlab::policy
