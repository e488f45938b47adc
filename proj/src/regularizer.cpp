#include "rasql/regularizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace rasql {

namespace {

void require_finite(std::span<const double> q) {
  if (q.empty()) throw std::invalid_argument("regularizer: empty action vector");
  for (double v : q)
    if (!std::isfinite(v)) throw std::invalid_argument("regularizer: non-finite input");
}

// (1/beta) ln sum_a w(a) exp(beta q(a)), with w = 1 when `weights` is empty.
double weighted_log_sum_exp(std::span<const double> q, std::span<const double> weights,
                            double beta) {
  double peak = -std::numeric_limits<double>::infinity();
  for (double v : q) peak = std::max(peak, beta * v);
  double total = 0.0;
  for (std::size_t a = 0; a < q.size(); ++a) {
    const double w = weights.empty() ? 1.0 : weights[a];
    total += w * std::exp(beta * q[a] - peak);
  }
  return (peak + std::log(total)) / beta;
}

void weighted_softmax(std::span<const double> q, std::span<const double> weights, double beta,
                      std::span<double> out) {
  if (out.size() != q.size()) throw std::invalid_argument("regularizer: output size mismatch");
  double peak = -std::numeric_limits<double>::infinity();
  for (double v : q) peak = std::max(peak, beta * v);
  double total = 0.0;
  for (std::size_t a = 0; a < q.size(); ++a) {
    const double w = weights.empty() ? 1.0 : weights[a];
    out[a] = w * std::exp(beta * q[a] - peak);
    total += out[a];
  }
  for (double& v : out) v /= total;
}

}  // namespace

std::vector<double> normalize_near_simplex(std::span<const double> p, double tol) {
  if (p.empty()) throw std::invalid_argument("regularizer: empty distribution");
  double total = 0.0;
  for (double v : p) {
    if (!std::isfinite(v) || v < -tol)
      throw std::invalid_argument("regularizer: distribution has a negative or non-finite entry");
    total += std::max(v, 0.0);
  }
  if (std::abs(total - 1.0) > tol)
    throw std::invalid_argument("regularizer: distribution does not sum to 1");
  std::vector<double> out(p.size());
  for (std::size_t a = 0; a < p.size(); ++a) out[a] = std::max(p[a], 0.0) / total;
  return out;
}

double hard_max(std::span<const double> q) {
  require_finite(q);
  return *std::max_element(q.begin(), q.end());
}

EntropyRegularizer::EntropyRegularizer(double beta) : beta_(beta) {
  if (!(beta > 0.0) || !std::isfinite(beta))
    throw std::invalid_argument("entropy regularizer: beta must be positive and finite");
}

double EntropyRegularizer::omega(std::span<const double> p) const {
  const auto dist = normalize_near_simplex(p);
  double total = 0.0;
  for (double v : dist)
    if (v > 0.0) total += v * std::log(v);
  return total / beta_;
}

double EntropyRegularizer::conjugate(std::span<const double> q) const {
  require_finite(q);
  return weighted_log_sum_exp(q, {}, beta_);
}

void EntropyRegularizer::conjugate_gradient(std::span<const double> q, std::span<double> out) const {
  require_finite(q);
  weighted_softmax(q, {}, beta_, out);
}

std::pair<double, double> EntropyRegularizer::conjugate_offset_range(std::size_t num_actions) const {
  return {0.0, std::log(static_cast<double>(num_actions)) / beta_};
}

std::string EntropyRegularizer::describe() const {
  std::ostringstream os;
  os << "entropy(beta=" << beta_ << ")";
  return os.str();
}

KlRegularizer::KlRegularizer(double beta, std::vector<double> ref_dist)
    : beta_(beta), ref_(std::move(ref_dist)) {
  if (!(beta > 0.0) || !std::isfinite(beta))
    throw std::invalid_argument("kl regularizer: beta must be positive and finite");
  if (ref_.empty()) throw std::invalid_argument("kl regularizer: empty reference distribution");
  double total = 0.0;
  for (double v : ref_) {
    if (!(v > 0.0)) throw std::invalid_argument("kl regularizer: reference entries must be > 0");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("kl regularizer: reference distribution must sum to 1");
}

double KlRegularizer::omega(std::span<const double> p) const {
  if (p.size() != ref_.size()) throw std::invalid_argument("kl regularizer: size mismatch");
  const auto dist = normalize_near_simplex(p);
  double total = 0.0;
  for (std::size_t a = 0; a < dist.size(); ++a)
    if (dist[a] > 0.0) total += dist[a] * std::log(dist[a] / ref_[a]);
  return total / beta_;
}

double KlRegularizer::conjugate(std::span<const double> q) const {
  require_finite(q);
  if (q.size() != ref_.size()) throw std::invalid_argument("kl regularizer: size mismatch");
  return weighted_log_sum_exp(q, ref_, beta_);
}

void KlRegularizer::conjugate_gradient(std::span<const double> q, std::span<double> out) const {
  require_finite(q);
  if (q.size() != ref_.size()) throw std::invalid_argument("kl regularizer: size mismatch");
  weighted_softmax(q, ref_, beta_, out);
}

std::pair<double, double> KlRegularizer::conjugate_offset_range(std::size_t) const {
  const double smallest = *std::min_element(ref_.begin(), ref_.end());
  return {std::log(smallest) / beta_, 0.0};
}

std::string KlRegularizer::describe() const {
  std::ostringstream os;
  os << "kl(beta=" << beta_ << ", ref=[";
  for (std::size_t a = 0; a < ref_.size(); ++a) os << (a ? "," : "") << ref_[a];
  os << "])";
  return os.str();
}

std::shared_ptr<const Regularizer> make_regularizer(const RegularizerSpec& spec) {
  if (spec.kind == "entropy") return std::make_shared<EntropyRegularizer>(spec.beta);
  if (spec.kind == "kl") return std::make_shared<KlRegularizer>(spec.beta, spec.ref_dist);
  throw std::invalid_argument("unknown regularizer kind '" + spec.kind + "'");
}

}  // namespace rasql
