#include "batchlab/oracle/finite_difference.hpp"

#include "batchlab/common/error.hpp"

#include <algorithm>
#include <cmath>

namespace batchlab::oracle {

GradientCheck check_gradients(const std::function<double()>& loss, std::span<nn::Tensor* const> params,
                              std::span<const nn::Tensor> analytic, double step, double floor) {
  if (params.size() != analytic.size()) throw ShapeError("check_gradients: parameter/gradient count mismatch");
  GradientCheck result;
  for (std::size_t p = 0; p < params.size(); ++p) {
    nn::Tensor& t = *params[p];
    if (!t.same_shape(analytic[p])) throw ShapeError("check_gradients: gradient shape mismatch");
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double saved = t[i];
      t[i] = saved + step;
      const double up = loss();
      t[i] = saved - step;
      const double down = loss();
      t[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double a = analytic[p][i];
      const double abs_err = std::abs(a - numeric);
      const double denom = std::max({std::abs(a), std::abs(numeric), floor});
      result.max_absolute_error = std::max(result.max_absolute_error, abs_err);
      result.max_relative_error = std::max(result.max_relative_error, abs_err / denom);
      ++result.checked;
    }
  }
  return result;
}

}  // namespace batchlab::oracle
