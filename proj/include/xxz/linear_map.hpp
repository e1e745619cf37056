#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>

namespace xxz {

// Matrix-free real linear operator.
struct LinearMap {
  std::uint64_t dimension = 0;
  bool hermitian = true;
  std::function<void(const double*, double*)> apply_fn;
  std::shared_ptr<const void> keepalive;  // optional owner of captured state

  void apply(const double* in, double* out) const { apply_fn(in, out); }

  Eigen::VectorXd operator()(const Eigen::VectorXd& v) const {
    if (static_cast<std::uint64_t>(v.size()) != dimension)
      throw std::invalid_argument("LinearMap: input size " +
                                  std::to_string(v.size()) +
                                  " does not match dimension " +
                                  std::to_string(dimension));
    Eigen::VectorXd out(v.size());
    apply_fn(v.data(), out.data());
    return out;
  }
};

}  // namespace xxz
