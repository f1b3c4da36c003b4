#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ltc/tensor.hpp"

namespace ltc {

// Mahalanobis-type distance (x - mu)^T W^T W (x - mu) for an m x D metric W.
double metric_distance(const Matrix& metric, std::span<const double> x, std::span<const double> mu);

// Mean log-likelihood of the true labels when p(y|x) is the softmax over
// usable classes of -0.5 * metric_distance(W, x, mu_y). Classes whose
// `counts` entry is zero are excluded.
double metric_log_likelihood(const Matrix& metric, const Matrix& features, std::span<const std::size_t> labels,
                             const Matrix& means, std::span<const std::size_t> counts);

// Gradient of metric_log_likelihood with respect to W.
Matrix metric_gradient(const Matrix& metric, const Matrix& features, std::span<const std::size_t> labels,
                       const Matrix& means, std::span<const std::size_t> counts);

struct MetricFitConfig {
  std::size_t epochs = 50;
  double initial_step = 1e-2;
  double grow = 1.2;    // step multiplier after an accepted step
  double shrink = 0.5;  // step multiplier after a rejected proposal
  std::size_t max_backtracks = 40;
};

struct MetricFitResult {
  Matrix metric;
  // Objective at initialization followed by the value after each epoch.
  std::vector<double> log_likelihood;
  std::size_t accepted_steps = 0;
};

// Gradient ascent from W = first m rows of the identity. A step is accepted
// only when it does not decrease the objective; otherwise the step size is
// shrunk and the proposal retried. Stops early when no step is accepted.
MetricFitResult metric_fit(const Matrix& features, std::span<const std::size_t> labels, const Matrix& means,
                           std::span<const std::size_t> counts, std::size_t metric_dim,
                           const MetricFitConfig& config = {});

}  // namespace ltc
