#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dstlab {

/// Scalar used throughout. Everything runs in double precision so that
/// finite-difference checks stay tight.
using Scalar = double;

using Index = Eigen::Index;

/// Dense row-major matrix; rows index batch examples, columns features.
using Matrix =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Train/eval distinction for forward passes (controls dropout).
enum class Mode { Train, Eval };

struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace dstlab
