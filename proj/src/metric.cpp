#include "ltc/metric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ltc/errors.hpp"

namespace ltc {

namespace {

void check_shapes(const Matrix& metric, const Matrix& features, std::span<const std::size_t> labels,
                  const Matrix& means, std::span<const std::size_t> counts) {
  if (metric.cols != features.cols || means.cols != features.cols) throw ContractViolation("metric shape mismatch");
  if (labels.size() != features.rows || counts.size() != means.rows) throw ContractViolation("label count mismatch");
  for (auto y : labels) {
    if (y >= means.rows || counts[y] == 0) throw ContractViolation("sample labelled with an unusable class");
  }
}

Matrix project(const Matrix& metric, const Matrix& x) {
  Matrix z(x.rows, metric.rows);
  for (std::size_t i = 0; i < x.rows; ++i) {
    for (std::size_t k = 0; k < metric.rows; ++k) z(i, k) = dot(metric.row(k), x.row(i));
  }
  return z;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

// Posterior p(y | x_i) over usable classes, computed in the projected space.
void posteriors(const Matrix& z, const Matrix& nu, std::span<const std::size_t> counts, std::size_t i,
                std::vector<double>& logits, std::vector<double>& p, double& lse) {
  const std::size_t S = nu.rows;
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t y = 0; y < S; ++y) {
    logits[y] = counts[y] == 0 ? -std::numeric_limits<double>::infinity()
                               : -0.5 * squared_distance(z.row(i), nu.row(y));
    m = std::max(m, logits[y]);
  }
  double s = 0.0;
  for (std::size_t y = 0; y < S; ++y) s += (p[y] = counts[y] == 0 ? 0.0 : std::exp(logits[y] - m));
  for (auto& v : p) v /= s;
  lse = m + std::log(s);
}

}  // namespace

double metric_distance(const Matrix& metric, std::span<const double> x, std::span<const double> mu) {
  if (x.size() != metric.cols || mu.size() != metric.cols) throw ContractViolation("metric shape mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < metric.rows; ++k) {
    const auto w = metric.row(k);
    double proj = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) proj += w[j] * (x[j] - mu[j]);
    s += proj * proj;
  }
  return s;
}

double metric_log_likelihood(const Matrix& metric, const Matrix& features, std::span<const std::size_t> labels,
                             const Matrix& means, std::span<const std::size_t> counts) {
  check_shapes(metric, features, labels, means, counts);
  if (features.rows == 0) throw ContractViolation("no samples");
  const Matrix z = project(metric, features);
  const Matrix nu = project(metric, means);
  std::vector<double> logits(means.rows), p(means.rows);
  double total = 0.0;
  for (std::size_t i = 0; i < features.rows; ++i) {
    double lse = 0.0;
    posteriors(z, nu, counts, i, logits, p, lse);
    total += logits[labels[i]] - lse;
  }
  return total / static_cast<double>(features.rows);
}

// With c_iy = [y == y_i] - p(y|x_i), the gradient is
//   -(1/N) sum_i sum_y c_iy W (x_i - mu_y)(x_i - mu_y)^T.
// Because sum_y c_iy = 0 this expands to terms that never form the D x D
// outer products explicitly.
Matrix metric_gradient(const Matrix& metric, const Matrix& features, std::span<const std::size_t> labels,
                       const Matrix& means, std::span<const std::size_t> counts) {
  check_shapes(metric, features, labels, means, counts);
  const std::size_t N = features.rows, S = means.rows, D = features.cols, m = metric.rows;
  const Matrix z = project(metric, features);
  const Matrix nu = project(metric, means);
  std::vector<double> logits(S), p(S), mu_mix(D), nu_mix(m);
  std::vector<double> class_weight(S, 0.0);
  Matrix grad(m, D);
  for (std::size_t i = 0; i < N; ++i) {
    double lse = 0.0;
    posteriors(z, nu, counts, i, logits, p, lse);
    std::fill(mu_mix.begin(), mu_mix.end(), 0.0);
    std::fill(nu_mix.begin(), nu_mix.end(), 0.0);
    for (std::size_t y = 0; y < S; ++y) {
      const double c = (y == labels[i] ? 1.0 : 0.0) - p[y];
      if (c == 0.0) continue;
      class_weight[y] += c;
      axpy(c, means.row(y).data(), mu_mix.data(), D);
      axpy(c, nu.row(y).data(), nu_mix.data(), m);
    }
    // + z_i mu_mix^T + nu_mix x_i^T
    for (std::size_t k = 0; k < m; ++k) {
      auto g = grad.row(k);
      axpy(z(i, k), mu_mix.data(), g.data(), D);
      axpy(nu_mix[k], features.row(i).data(), g.data(), D);
    }
  }
  // - sum_y (sum_i c_iy) nu_y mu_y^T
  for (std::size_t y = 0; y < S; ++y) {
    if (class_weight[y] == 0.0) continue;
    for (std::size_t k = 0; k < m; ++k) axpy(-class_weight[y] * nu(y, k), means.row(y).data(), grad.row(k).data(), D);
  }
  for (auto& v : grad.data) v /= static_cast<double>(N);
  return grad;
}

MetricFitResult metric_fit(const Matrix& features, std::span<const std::size_t> labels, const Matrix& means,
                           std::span<const std::size_t> counts, std::size_t metric_dim,
                           const MetricFitConfig& config) {
  const std::size_t D = features.cols;
  if (metric_dim < 1 || metric_dim > D) throw ArgumentError("metric dimension must lie in [1, D]");
  MetricFitResult r;
  r.metric = Matrix(metric_dim, D);
  for (std::size_t k = 0; k < metric_dim; ++k) r.metric(k, k) = 1.0;

  double current = metric_log_likelihood(r.metric, features, labels, means, counts);
  if (!std::isfinite(current)) throw NumericError("non-finite metric log-likelihood at initialization");
  r.log_likelihood.push_back(current);
  double step = config.initial_step;
  Matrix proposal(metric_dim, D);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const Matrix grad = metric_gradient(r.metric, features, labels, means, counts);
    bool accepted = false;
    for (std::size_t attempt = 0; attempt <= config.max_backtracks; ++attempt) {
      for (std::size_t j = 0; j < proposal.data.size(); ++j) proposal.data[j] = r.metric.data[j] + step * grad.data[j];
      const double value = metric_log_likelihood(proposal, features, labels, means, counts);
      if (!std::isfinite(value)) throw NumericError("non-finite metric log-likelihood");
      if (value >= current) {
        r.metric = proposal;
        current = value;
        step *= config.grow;
        accepted = true;
        ++r.accepted_steps;
        break;
      }
      step *= config.shrink;
    }
    if (!accepted) break;
    r.log_likelihood.push_back(current);
  }
  return r;
}

}  // namespace ltc
