#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace vpp::dynamics {

// Binary indexed tree over non-negative weights with point assignment and
// inverse-CDF lookup. The exact weights are kept alongside the tree; the tree
// is rebuilt from them every `refresh_period` assignments so that rounding in
// the partial sums does not accumulate.
class WeightIndex {
 public:
  explicit WeightIndex(std::vector<double> weights = {}, std::size_t refresh_period = 4096)
      : weights_(std::move(weights)), refresh_period_(refresh_period) {
    rebuild();
  }

  std::size_t size() const { return weights_.size(); }
  double weight(std::size_t i) const { return weights_[i]; }
  const std::vector<double>& weights() const { return weights_; }

  void set(std::size_t i, double w) {
    if (w < 0.0) throw std::invalid_argument("WeightIndex: negative weight");
    const double delta = w - weights_[i];
    weights_[i] = w;
    if (++updates_ >= refresh_period_) {
      rebuild();
      return;
    }
    for (std::size_t k = i + 1; k <= weights_.size(); k += k & (~k + 1)) tree_[k] += delta;
  }

  double total() const {
    double s = 0.0;
    for (std::size_t k = weights_.size(); k > 0; k -= k & (~k + 1)) s += tree_[k];
    return s;
  }

  /// Smallest index i with prefix(i + 1) > u, for u in [0, total()).
  std::size_t find(double u) const {
    std::size_t pos = 0;
    std::size_t step = 1;
    while (step * 2 <= weights_.size()) step *= 2;
    for (; step > 0; step /= 2) {
      const std::size_t next = pos + step;
      if (next <= weights_.size() && tree_[next] <= u) {
        u -= tree_[next];
        pos = next;
      }
    }
    return pos < weights_.size() ? pos : weights_.size() - 1;
  }

  void rebuild() {
    updates_ = 0;
    tree_.assign(weights_.size() + 1, 0.0);
    for (std::size_t k = 1; k <= weights_.size(); ++k) {
      tree_[k] += weights_[k - 1];
      const std::size_t parent = k + (k & (~k + 1));
      if (parent <= weights_.size()) tree_[parent] += tree_[k];
    }
  }

 private:
  std::vector<double> weights_;
  std::vector<double> tree_;
  std::size_t refresh_period_;
  std::size_t updates_ = 0;
};

}  // namespace vpp::dynamics
