#pragma once

#include <cmath>
#include <cstdint>

#include <Eigen/Core>

namespace orthoprobe::probe {

struct AdamSettings {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adaptive-moment state for one parameter block. Each block keeps its own
/// step counter, so blocks updated at different rates get their own bias
/// correction.
template <typename Block>
class AdamState {
 public:
  explicit AdamState(const Block& like)
      : m_(Block::Zero(like.rows(), like.cols())), v_(Block::Zero(like.rows(), like.cols())) {}

  void step(Block& param, const Block& grad, double lr, const AdamSettings& s) {
    ++t_;
    m_ = s.beta1 * m_ + (1.0 - s.beta1) * grad;
    v_ = s.beta2 * v_ + (1.0 - s.beta2) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(t_));
    param.array() -= lr * (m_.array() / c1) / ((v_.array() / c2).sqrt() + s.epsilon);
  }

  std::uint64_t steps() const { return t_; }

 private:
  Block m_;
  Block v_;
  std::uint64_t t_ = 0;
};

}  // namespace orthoprobe::probe
