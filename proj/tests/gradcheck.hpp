// Central finite-difference oracle for the 64-bit autodiff build.
#ifndef JSSP_TESTS_GRADCHECK_HPP
#define JSSP_TESTS_GRADCHECK_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "jssp/autodiff.hpp"

namespace gradcheck {

using T = jssp::ad::Tensor<double>;
using M = jssp::ad::Matrix<double>;

// Largest relative error |analytic - numeric| / max(|analytic|, |numeric|, floor)
// over every entry of every parameter. `loss` must rebuild the graph from the
// current parameter values on each call.
inline double max_relative_error(std::vector<T> params, const std::function<T()>& loss, double h = 1e-6,
                                 double floor = 1e-3) {
  for (auto& p : params) p.zero_grad();
  jssp::ad::backward(loss());
  std::vector<M> analytic;
  for (auto& p : params) analytic.push_back(p.has_grad() ? p.grad() : M::Zero(p.rows(), p.cols()));
  double worst = 0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& value = params[k].mutable_value();
    for (Eigen::Index i = 0; i < value.size(); ++i) {
      const double saved = value.data()[i];
      value.data()[i] = saved + h;
      const double up = loss().item();
      value.data()[i] = saved - h;
      const double down = loss().item();
      value.data()[i] = saved;
      const double numeric = (up - down) / (2 * h);
      const double a = analytic[k].data()[i];
      const double err = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor});
      worst = std::max(worst, err);
    }
  }
  return worst;
}

}  // namespace gradcheck

#endif  // JSSP_TESTS_GRADCHECK_HPP
