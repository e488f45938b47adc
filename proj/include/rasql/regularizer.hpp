#pragma once

#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace rasql {

/// Strongly convex policy regularizer on the action simplex together with
/// its Legendre-Fenchel conjugate.
///
/// Implementations supply Omega(p), Omega*(q) = max_p <p, q> - Omega(p), and
/// the maximizer grad Omega*(q). Solvers and learners only see this
/// interface.
class Regularizer {
 public:
  virtual ~Regularizer() = default;

  /// Omega(p). `p` must be within 1e-9 of the simplex; it is clamped and
  /// renormalized before evaluation. Uses 0 ln 0 = 0.
  virtual double omega(std::span<const double> p) const = 0;

  /// Omega*(q), overflow-safe for |beta q| up to well beyond 1e4.
  virtual double conjugate(std::span<const double> q) const = 0;

  /// grad Omega*(q), written into `out` (same length as q).
  virtual void conjugate_gradient(std::span<const double> q, std::span<double> out) const = 0;

  /// Strong convexity modulus with respect to the l1 norm.
  virtual double strong_convexity() const = 0;

  /// Constants (lo, hi) with max(q) + lo <= Omega*(q) <= max(q) + hi.
  virtual std::pair<double, double> conjugate_offset_range(std::size_t num_actions) const = 0;

  virtual std::string describe() const = 0;

  std::vector<double> conjugate_gradient(std::span<const double> q) const {
    std::vector<double> out(q.size());
    conjugate_gradient(q, out);
    return out;
  }
};

/// Omega(p) = (1/beta) sum p ln p.
class EntropyRegularizer final : public Regularizer {
 public:
  explicit EntropyRegularizer(double beta);

  double beta() const { return beta_; }

  double omega(std::span<const double> p) const override;
  double conjugate(std::span<const double> q) const override;
  void conjugate_gradient(std::span<const double> q, std::span<double> out) const override;
  using Regularizer::conjugate_gradient;
  double strong_convexity() const override { return 1.0 / beta_; }
  std::pair<double, double> conjugate_offset_range(std::size_t num_actions) const override;
  std::string describe() const override;

 private:
  double beta_;
};

/// Omega(p) = (1/beta) sum p ln(p / p_ref).
class KlRegularizer final : public Regularizer {
 public:
  KlRegularizer(double beta, std::vector<double> ref_dist);

  double beta() const { return beta_; }
  const std::vector<double>& ref_dist() const { return ref_; }

  double omega(std::span<const double> p) const override;
  double conjugate(std::span<const double> q) const override;
  void conjugate_gradient(std::span<const double> q, std::span<double> out) const override;
  using Regularizer::conjugate_gradient;
  double strong_convexity() const override { return 1.0 / beta_; }
  std::pair<double, double> conjugate_offset_range(std::size_t num_actions) const override;
  std::string describe() const override;

 private:
  double beta_;
  std::vector<double> ref_;
};

struct RegularizerSpec {
  std::string kind = "entropy";  // "entropy" | "kl"
  double beta = 1.0;
  std::vector<double> ref_dist;  // kl only
};

std::shared_ptr<const Regularizer> make_regularizer(const RegularizerSpec& spec);

/// max_a q(a); the unregularized (ASQL) bootstrap.
double hard_max(std::span<const double> q);

/// Clamps tiny negatives and renormalizes `p` if it lies within `tol` of the
/// simplex; throws std::invalid_argument otherwise.
std::vector<double> normalize_near_simplex(std::span<const double> p, double tol = 1e-9);

}  // namespace rasql
