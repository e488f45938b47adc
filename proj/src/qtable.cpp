#include "rasql/qtable.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rasql {

QTable::QTable(std::size_t num_states, std::size_t num_actions, std::vector<double> values)
    : num_states_(num_states), num_actions_(num_actions), values_(std::move(values)) {
  if (values_.size() != num_states_ * num_actions_)
    throw std::invalid_argument("QTable: value count does not match |Z|*|A|");
}

double QTable::sup_norm() const {
  double best = 0.0;
  for (double v : values_) best = std::max(best, std::abs(v));
  return best;
}

double sup_distance(const QTable& a, const QTable& b) {
  if (a.num_states() != b.num_states() || a.num_actions() != b.num_actions())
    throw std::invalid_argument("sup_distance: shape mismatch");
  double best = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i)
    best = std::max(best, std::abs(a.values()[i] - b.values()[i]));
  return best;
}

double sup_distance(std::span<const QTable> a, std::span<const QTable> b) {
  if (a.size() != b.size()) throw std::invalid_argument("sup_distance: phase count mismatch");
  double best = 0.0;
  for (std::size_t l = 0; l < a.size(); ++l) best = std::max(best, sup_distance(a[l], b[l]));
  return best;
}

}  // namespace rasql
