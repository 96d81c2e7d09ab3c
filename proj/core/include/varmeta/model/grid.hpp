#pragma once

namespace varmeta {

/// Uniform doubly-periodic q x q grid over a square domain.
///
/// Nodes sit at x_i = lower + i * dx for i = 0..q-1, so the domain midpoint
/// is a node whenever q is even. Index arithmetic wraps modulo q.
struct Grid {
  int q = 40;
  double lower = -3.0;
  double upper = 3.0;
  double dt = 1e-4;
  int n_steps = 100;

  double width() const { return upper - lower; }
  double dx() const { return width() / q; }
  double dy() const { return dx(); }
  double x(int i) const { return lower + i * dx(); }
  double y(int j) const { return lower + j * dy(); }

  int wrap(int i) const {
    const int r = i % q;
    return r < 0 ? r + q : r;
  }
  /// Row-major cell index with i the x index and j the y index.
  int index(int i, int j) const { return wrap(i) * q + wrap(j); }
  int cells() const { return q * q; }
  int state_size() const { return 3 * q * q; }

  /// Throws std::invalid_argument on a malformed grid.
  void validate() const;
};

}  // namespace varmeta
