#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rasql {

/// Real-valued table over Z x A, row-major.
class QTable {
 public:
  QTable() = default;
  QTable(std::size_t num_states, std::size_t num_actions, double fill = 0.0)
      : num_states_(num_states), num_actions_(num_actions), values_(num_states * num_actions, fill) {}
  QTable(std::size_t num_states, std::size_t num_actions, std::vector<double> values);

  std::size_t num_states() const { return num_states_; }
  std::size_t num_actions() const { return num_actions_; }

  double operator()(std::size_t z, std::size_t a) const { return values_[z * num_actions_ + a]; }
  double& operator()(std::size_t z, std::size_t a) { return values_[z * num_actions_ + a]; }

  std::span<const double> row(std::size_t z) const {
    return {values_.data() + z * num_actions_, num_actions_};
  }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  double sup_norm() const;

  friend bool operator==(const QTable&, const QTable&) = default;

 private:
  std::size_t num_states_ = 0;
  std::size_t num_actions_ = 0;
  std::vector<double> values_;
};

/// max |a - b| over entries; shapes must match.
double sup_distance(const QTable& a, const QTable& b);

/// max over phases of sup_distance.
double sup_distance(std::span<const QTable> a, std::span<const QTable> b);

}  // namespace rasql
