#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

namespace symspin {

// Standard symplectic vector space of dimension 2l with its canonical basis.
// omega_lower(i,j) holds the pairing of basis vectors i and j; omega_upper is
// defined by sum_k omega_lower(i,k) * omega_upper(j,k) = delta_ij and is
// obtained by a linear solve, never hard-coded.
struct SymplecticSpace {
  int l = 0;
  Eigen::MatrixXd omega_lower;
  Eigen::MatrixXd omega_upper;

  int dim() const { return 2 * l; }

  static SymplecticSpace standard(int l) {
    if (l < 1) throw std::invalid_argument("half-dimension must be positive");
    SymplecticSpace s;
    s.l = l;
    const int n = 2 * l;
    s.omega_lower = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < l; ++i) {
      s.omega_lower(i, l + i) = 1.0;
      s.omega_lower(l + i, i) = -1.0;
    }
    // omega_lower * omega_upper^T = I
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Identity(n, n);
    s.omega_upper = s.omega_lower.fullPivLu().solve(rhs).transpose();
    return s;
  }
};

// Small dense real tensor with every slot of dimension 2l. Indices are
// 0-based; slot 0 varies slowest.
struct DenseTensor {
  int dim = 0;
  int rank = 0;
  std::vector<double> data;

  DenseTensor() = default;
  DenseTensor(int dim_, int rank_) : dim(dim_), rank(rank_) {
    std::size_t n = 1;
    for (int r = 0; r < rank; ++r) n *= static_cast<std::size_t>(dim);
    data.assign(n, 0.0);
  }

  std::size_t offset(const std::vector<int>& idx) const {
    if (static_cast<int>(idx.size()) != rank)
      throw std::invalid_argument("tensor index arity mismatch");
    std::size_t o = 0;
    for (int r = 0; r < rank; ++r) {
      if (idx[r] < 0 || idx[r] >= dim) throw std::out_of_range("tensor index");
      o = o * static_cast<std::size_t>(dim) + static_cast<std::size_t>(idx[r]);
    }
    return o;
  }

  double& at(const std::vector<int>& idx) { return data[offset(idx)]; }
  double at(const std::vector<int>& idx) const { return data[offset(idx)]; }
};

namespace detail {

inline void check_slot(const DenseTensor& t, int slot) {
  if (slot < 0 || slot >= t.rank) throw std::out_of_range("tensor slot");
}

// Contracts the matrix m against the given slot of t:
// out[..., i, ...] = sum_c m(i, c) * t[..., c, ...].
inline DenseTensor contract_slot(const DenseTensor& t, int slot,
                                 const Eigen::MatrixXd& m) {
  check_slot(t, slot);
  DenseTensor out(t.dim, t.rank);
  std::size_t inner = 1;
  for (int r = slot + 1; r < t.rank; ++r) inner *= t.dim;
  std::size_t outer = t.data.size() / (inner * t.dim);
  for (std::size_t a = 0; a < outer; ++a)
    for (int i = 0; i < t.dim; ++i)
      for (std::size_t b = 0; b < inner; ++b) {
        double acc = 0.0;
        for (int c = 0; c < t.dim; ++c)
          acc += m(i, c) * t.data[(a * t.dim + c) * inner + b];
        out.data[(a * t.dim + i) * inner + b] = acc;
      }
  return out;
}

}  // namespace detail

// Raises a lower index: contracts omega_upper(i, c) against slot c, leaving
// the new upper index in the same slot position.
inline DenseTensor raise_index(const SymplecticSpace& s, const DenseTensor& t,
                               int slot) {
  if (t.dim != s.dim()) throw std::invalid_argument("tensor/space dimension");
  return detail::contract_slot(t, slot, s.omega_upper);
}

// Lowers an upper index: out[..., i, ...] = sum_t t[..., t, ...] * omega_ti.
inline DenseTensor lower_index(const SymplecticSpace& s, const DenseTensor& t,
                               int slot) {
  if (t.dim != s.dim()) throw std::invalid_argument("tensor/space dimension");
  return detail::contract_slot(t, slot, s.omega_lower.transpose());
}

}  // namespace symspin
