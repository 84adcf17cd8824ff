#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>

namespace sonata {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline std::span<const double> view(const Vector& v) {
    return {v.data(), static_cast<std::size_t>(v.size())};
}
inline std::span<double> view(Vector& v) {
    return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace sonata
