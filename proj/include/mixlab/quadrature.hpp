#pragma once

#include "mixlab/common.hpp"

namespace mixlab {

// Uniform quadrature on the unit circle.  Node powers are read from a table
// indexed by (j * k) mod M, so angle reduction is exact in integer arithmetic
// and the rule keeps its trigonometric-polynomial exactness: the mean of a
// trig polynomial with no nonzero frequency divisible by M is computed
// exactly (up to rounding of the compensated sum).
class CircleQuadrature {
 public:
  explicit CircleQuadrature(std::size_t nodes) : tw_(nodes) {
    if (nodes == 0) throw std::invalid_argument("quadrature: need nodes > 0");
    for (std::size_t r = 0; r < nodes; ++r)
      tw_[r] = std::polar(1.0, kTwoPi * static_cast<double>(r) / static_cast<double>(nodes));
  }

  std::size_t nodes() const { return tw_.size(); }

  double theta(std::size_t j) const {
    return kTwoPi * static_cast<double>(j) / static_cast<double>(tw_.size());
  }

  // e^{2 pi i j k / M}; k may be negative.
  cd unit_power(std::size_t j, long long k) const {
    long long m = static_cast<long long>(tw_.size());
    long long r = (static_cast<long long>(j) * k) % m;
    if (r < 0) r += m;
    return tw_[static_cast<std::size_t>(r)];
  }

  // (1/M) sum_j e^{2 pi i j order / M} samples[j], compensated.
  cd moment(const std::vector<cd>& samples, long long order) const {
    if (samples.size() != tw_.size()) throw std::invalid_argument("quadrature: sample mismatch");
    KahanSum<cd> acc;
    for (std::size_t j = 0; j < samples.size(); ++j) acc.add(unit_power(j, order) * samples[j]);
    return acc.value() / static_cast<double>(samples.size());
  }

 private:
  std::vector<cd> tw_;
};

}  // namespace mixlab
