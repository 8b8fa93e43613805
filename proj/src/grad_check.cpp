#include "aptshield/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "aptshield/errors.hpp"

namespace aptshield::num {

double grad_check(const LossFn& loss_fn, std::span<const double> params,
                  std::span<const double> analytic_grad, double eps) {
    if (eps <= 0.0) throw DomainError("grad_check: eps must be > 0");
    if (params.size() != analytic_grad.size()) {
        throw ShapeError("grad_check: gradient length does not match params");
    }
    std::vector<double> p(params.begin(), params.end());
    auto eval = [&](std::span<const double> q) {
        double v = loss_fn(q);
        if (!std::isfinite(v)) throw NumericError("grad_check: non-finite loss");
        return v;
    };
    eval(p);

    double worst = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double orig = p[i];
        p[i] = orig + eps;
        const double up = eval(p);
        p[i] = orig - eps;
        const double down = eval(p);
        p[i] = orig;
        const double fd = (up - down) / (2.0 * eps);
        const double g = analytic_grad[i];
        const double denom = std::max({1.0, std::abs(g), std::abs(fd)});
        worst = std::max(worst, std::abs(g - fd) / denom);
    }
    return worst;
}

}  // namespace aptshield::num
