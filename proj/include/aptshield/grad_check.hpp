#pragma once

#include <functional>
#include <span>
#include <vector>

namespace aptshield::num {

using LossFn = std::function<double(std::span<const double>)>;

// Central finite-difference check of an analytic gradient at `params`.
// Returns max over coordinates of
//   |analytic - central_diff| / max(1, |analytic|, |central_diff|).
// eps must be > 0; a non-finite loss value raises NumericError.
double grad_check(const LossFn& loss_fn, std::span<const double> params,
                  std::span<const double> analytic_grad, double eps);

}  // namespace aptshield::num
