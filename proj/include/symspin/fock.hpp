#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "symspin/symplectic.hpp"

namespace symspin {

using Complex = std::complex<double>;

// Matrix of multiplication by x in the orthonormal Hermite-function basis
// h_0..h_{N-1}: entries sqrt(n/2) at (n-1,n) and sqrt((n+1)/2) at (n+1,n).
inline Eigen::MatrixXd position_matrix(int n_levels) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n_levels, n_levels);
  for (int n = 1; n < n_levels; ++n) x(n - 1, n) = std::sqrt(n / 2.0);
  for (int n = 0; n + 1 < n_levels; ++n) x(n + 1, n) = std::sqrt((n + 1) / 2.0);
  return x;
}

// Matrix of d/dx in the same basis: sqrt(n/2) at (n-1,n), -sqrt((n+1)/2) at
// (n+1,n). Antisymmetric.
inline Eigen::MatrixXd derivative_matrix(int n_levels) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n_levels, n_levels);
  for (int n = 1; n < n_levels; ++n) d(n - 1, n) = std::sqrt(n / 2.0);
  for (int n = 0; n + 1 < n_levels; ++n)
    d(n + 1, n) = -std::sqrt((n + 1) / 2.0);
  return d;
}

// D^2 - X^2; diagonal with entry -(2n+1) away from the truncation boundary.
inline Eigen::MatrixXd oscillator_matrix(int n_levels) {
  Eigen::MatrixXd d = derivative_matrix(n_levels);
  Eigen::MatrixXd x = position_matrix(n_levels);
  return d * d - x * x;
}

// Truncated model: l modes, `cutoff` Hermite levels per mode. Basis vectors
// are indexed by multi-indices (n_1..n_l) in lexicographic order, flattened
// with mode 1 most significant.
struct FockModel {
  int l = 0;
  int cutoff = 0;

  FockModel() = default;
  FockModel(int l_, int cutoff_) : l(l_), cutoff(cutoff_) {
    static const int max_cutoff[4] = {0, 32, 16, 8};
    if (l < 1 || l > 3) throw std::invalid_argument("mode count out of range");
    if (cutoff < 4) throw std::invalid_argument("cutoff below minimum of 4");
    if (cutoff > max_cutoff[l])
      throw std::invalid_argument("cutoff exceeds per-mode limit");
  }

  int dim() const {
    int d = 1;
    for (int k = 0; k < l; ++k) d *= cutoff;
    return d;
  }

  std::vector<int> levels(int flat) const {
    std::vector<int> n(l);
    for (int k = l - 1; k >= 0; --k) {
      n[k] = flat % cutoff;
      flat /= cutoff;
    }
    return n;
  }

  int flat_index(const std::vector<int>& levels_) const {
    if (static_cast<int>(levels_.size()) != l)
      throw std::invalid_argument("level tuple arity");
    int f = 0;
    for (int k = 0; k < l; ++k) {
      if (levels_[k] < 0 || levels_[k] >= cutoff)
        throw std::out_of_range("level out of range");
      f = f * cutoff + levels_[k];
    }
    return f;
  }

  bool in_effective_subspace(int flat, int margin = 2) const {
    for (int k = 0; k < l; ++k) {
      if (flat % cutoff > cutoff - 1 - margin) return false;
      flat /= cutoff;
    }
    return true;
  }

  std::vector<int> effective_indices(int margin = 2) const {
    std::vector<int> out;
    for (int f = 0; f < dim(); ++f)
      if (in_effective_subspace(f, margin)) out.push_back(f);
    return out;
  }

  int parity(int flat) const {
    int p = 0;
    for (int k = 0; k < l; ++k) {
      p += flat % cutoff;
      flat /= cutoff;
    }
    return p % 2;
  }

  bool operator==(const FockModel& o) const {
    return l == o.l && cutoff == o.cutoff;
  }
};

struct Spinor {
  FockModel model;
  Eigen::VectorXcd c;

  Spinor() = default;
  explicit Spinor(const FockModel& m) : model(m), c(m.dim()) { c.setZero(); }
  Spinor(const FockModel& m, Eigen::VectorXcd v) : model(m), c(std::move(v)) {
    if (c.size() != model.dim())
      throw std::invalid_argument("coefficient length != model dimension");
  }

  double norm() const { return c.norm(); }
};

inline Complex inner(const Spinor& a, const Spinor& b) {
  if (!(a.model == b.model)) throw std::invalid_argument("model mismatch");
  return a.c.adjoint() * b.c;
}

// Applies a one-mode matrix on the given mode of a flattened multi-mode
// vector without forming the Kronecker product.
inline Eigen::VectorXcd apply_mode(const FockModel& m, int mode,
                                   const Eigen::MatrixXd& op,
                                   const Eigen::VectorXcd& v) {
  if (mode < 0 || mode >= m.l) throw std::out_of_range("mode index");
  if (v.size() != m.dim() || op.rows() != m.cutoff || op.cols() != m.cutoff)
    throw std::invalid_argument("operand shape mismatch");
  const int n = m.cutoff;
  int inner_sz = 1;
  for (int k = mode + 1; k < m.l; ++k) inner_sz *= n;
  const int outer_sz = m.dim() / (inner_sz * n);
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(v.size());
  for (int a = 0; a < outer_sz; ++a)
    for (int b = 0; b < inner_sz; ++b)
      for (int i = 0; i < n; ++i) {
        Complex acc = 0.0;
        for (int j = 0; j < n; ++j)
          acc += op(i, j) * v[(a * n + j) * inner_sz + b];
        out[(a * n + i) * inner_sz + b] = acc;
      }
  return out;
}

// Action of the k-th canonical basis vector under symplectic Clifford
// multiplication: the first l directions act as i*x_k (position), the last l
// as d/dx_{k-l} (derivative). 0-based k in [0, 2l).
inline Eigen::VectorXcd clifford_basis_apply(const FockModel& m, int k,
                                             const Eigen::VectorXcd& v) {
  if (k < 0 || k >= 2 * m.l) throw std::out_of_range("basis direction");
  if (k < m.l)
    return Complex(0.0, 1.0) * apply_mode(m, k, position_matrix(m.cutoff), v);
  return apply_mode(m, k - m.l, derivative_matrix(m.cutoff), v);
}

inline Spinor clifford_apply(const Spinor& s, const Eigen::VectorXd& vec) {
  if (vec.size() != 2 * s.model.l)
    throw std::invalid_argument("vector length != 2l");
  Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(s.c.size());
  for (int k = 0; k < 2 * s.model.l; ++k)
    if (vec[k] != 0.0) acc += vec[k] * clifford_basis_apply(s.model, k, s.c);
  return Spinor(s.model, acc);
}

// Dense matrix of a one-mode operator on the flattened model.
inline Eigen::MatrixXcd mode_matrix(const FockModel& m, int mode,
                                    const Eigen::MatrixXd& op) {
  const int d = m.dim();
  Eigen::MatrixXcd out(d, d);
  Eigen::VectorXcd e = Eigen::VectorXcd::Zero(d);
  for (int j = 0; j < d; ++j) {
    e.setZero();
    e[j] = 1.0;
    out.col(j) = apply_mode(m, mode, op, e);
  }
  return out;
}

inline Eigen::MatrixXcd clifford_matrix(const FockModel& m, int k) {
  if (k < 0 || k >= 2 * m.l) throw std::out_of_range("basis direction");
  if (k < m.l)
    return Complex(0.0, 1.0) * mode_matrix(m, k, position_matrix(m.cutoff));
  return mode_matrix(m, k - m.l, derivative_matrix(m.cutoff));
}

}  // namespace symspin
