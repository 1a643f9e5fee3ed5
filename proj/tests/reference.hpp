// Random inputs and plain-loop reimplementations of the agent losses, shared
// by the unit tests and the acceptance run.
#ifndef JSSP_TESTS_REFERENCE_HPP
#define JSSP_TESTS_REFERENCE_HPP

#include <cmath>
#include <vector>

#include "jssp/autodiff.hpp"
#include "jssp/rng.hpp"

namespace reference {

using jssp::Rng;
using jssp::ad::Index;
using jssp::ad::Mask;
using Md = jssp::ad::Matrix<double>;

inline Md random_matrix(Rng& rng, Index r, Index c, double lo = -2.0, double hi = 2.0) {
  Md m(r, c);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = lo + (hi - lo) * rng.uniform();
  return m;
}

inline Mask random_mask(Rng& rng, Index r, Index c) {
  Mask mask(r, c);
  for (Index i = 0; i < mask.size(); ++i) mask.data()[i] = rng.bernoulli(0.5);
  for (Index row = 0; row < r; ++row) mask(row, static_cast<Index>(rng.below(c))) = true;
  return mask;
}

inline std::vector<int> random_legal_actions(Rng& rng, const Mask& mask) {
  std::vector<int> out;
  for (Index r = 0; r < mask.rows(); ++r) {
    std::vector<int> legal;
    for (Index c = 0; c < mask.cols(); ++c)
      if (mask(r, c)) legal.push_back(static_cast<int>(c));
    out.push_back(legal[rng.below(legal.size())]);
  }
  return out;
}

// ---- independent scalar references --------------------------------------

inline double ref_cql(const Md& q, const Mask& mask, const std::vector<int>& actions, double alpha) {
  double total = 0;
  for (Index r = 0; r < q.rows(); ++r) {
    double s = 0;
    for (Index c = 0; c < q.cols(); ++c)
      if (mask(r, c)) s += std::exp(q(r, c));
    total += std::log(s) - q(r, actions[static_cast<std::size_t>(r)]);
  }
  return alpha * total / static_cast<double>(q.rows());
}

inline double ref_huber(double u, double k) { return std::abs(u) <= k ? 0.5 * u * u : k * (std::abs(u) - 0.5 * k); }

inline double ref_quantile_loss(const Md& pred, const Md& target, double kappa) {
  const Index n = pred.cols();
  double total = 0;
  for (Index b = 0; b < pred.rows(); ++b)
    for (Index i = 0; i < n; ++i) {
      const double tau = (2.0 * static_cast<double>(i + 1) - 1.0) / (2.0 * static_cast<double>(n));
      double inner = 0;
      for (Index j = 0; j < n; ++j) {
        const double u = target(b, j) - pred(b, i);
        inner += std::abs(tau - (u < 0 ? 1.0 : 0.0)) * ref_huber(u, kappa);
      }
      total += inner / static_cast<double>(n);
    }
  return total / static_cast<double>(pred.rows());
}

}  // namespace reference

#endif  // JSSP_TESTS_REFERENCE_HPP
