#pragma once

#include <array>
#include <cstddef>
#include <numbers>

#include "qnsp/errors.hpp"

namespace qnsp {

/// Periodic collocation grid on a d-dimensional torus, d in {1,2,3}.
/// Modes per axis must be even and >= 8.
class Grid {
 public:
  Grid(int dim, std::array<int, 3> n,
       std::array<double, 3> length = {2 * std::numbers::pi,
                                       2 * std::numbers::pi,
                                       2 * std::numbers::pi})
      : dim_(dim), n_(n), length_(length) {
    if (dim < 1 || dim > 3) throw ConfigError("grid dimension must be 1, 2 or 3");
    for (int a = 0; a < dim; ++a) {
      if (n_[a] < 8 || n_[a] % 2 != 0)
        throw ConfigError("modes per axis must be even and >= 8");
      if (length_[a] <= 0) throw ConfigError("axis period must be positive");
    }
    for (int a = dim; a < 3; ++a) {
      n_[a] = 1;
      length_[a] = 1.0;
    }
  }

  static Grid uniform(int dim, int n, double length = 2 * std::numbers::pi) {
    return Grid(dim, {n, n, n}, {length, length, length});
  }

  int dim() const { return dim_; }
  int n(int axis) const { return n_[axis]; }
  double length(int axis) const { return length_[axis]; }
  double dx(int axis) const { return length_[axis] / n_[axis]; }

  std::size_t points() const {
    std::size_t p = 1;
    for (int a = 0; a < dim_; ++a) p *= static_cast<std::size_t>(n_[a]);
    return p;
  }
  double volume() const {
    double v = 1;
    for (int a = 0; a < dim_; ++a) v *= length_[a];
    return v;
  }
  double cell_volume() const { return volume() / static_cast<double>(points()); }

  /// Collocation coordinate of index i along axis: x = i * L / n.
  double coord(int axis, int i) const { return length_[axis] * i / n_[axis]; }

  /// Two-thirds dealiasing cutoff (keep |k| <= floor(n/3)).
  int dealias_cutoff(int axis) const { return n_[axis] / 3; }

  bool operator==(const Grid& o) const {
    if (dim_ != o.dim_) return false;
    for (int a = 0; a < dim_; ++a)
      if (n_[a] != o.n_[a] || length_[a] != o.length_[a]) return false;
    return true;
  }
  bool operator!=(const Grid& o) const { return !(*this == o); }

 private:
  int dim_;
  std::array<int, 3> n_;
  std::array<double, 3> length_;
};

}  // namespace qnsp
