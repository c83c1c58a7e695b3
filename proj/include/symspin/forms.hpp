#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <stdexcept>
#include <vector>

#include "symspin/fock.hpp"
#include "symspin/symplectic.hpp"

namespace symspin {

// Sorted index subsets of {0..dim-1} of size r, in lexicographic order.
inline std::vector<std::vector<int>> index_subsets(int dim, int r) {
  std::vector<std::vector<int>> out;
  if (r < 0 || r > dim) return out;
  std::vector<int> cur(r);
  for (int i = 0; i < r; ++i) cur[i] = i;
  while (true) {
    out.push_back(cur);
    int k = r - 1;
    while (k >= 0 && cur[k] == dim - r + k) --k;
    if (k < 0) break;
    ++cur[k];
    for (int j = k + 1; j < r; ++j) cur[j] = cur[j - 1] + 1;
  }
  return out;
}

inline int binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long long b = 1;
  for (int i = 0; i < k; ++i) b = b * (n - i) / (i + 1);
  return static_cast<int>(b);
}

// Position a sorted subset occupies in the lexicographic enumeration.
inline int subset_position(int dim, const std::vector<int>& subset) {
  int r = static_cast<int>(subset.size());
  int pos = 0;
  int prev = -1;
  for (int k = 0; k < r; ++k) {
    for (int v = prev + 1; v < subset[k]; ++v)
      pos += binomial(dim - 1 - v, r - 1 - k);
    prev = subset[k];
  }
  return pos;
}

// Spinor-valued exterior form of the given degree. Component on a sorted
// subset {i_1 < ... < i_r} is the value of the form on (e_{i_1},...,e_{i_r});
// wedge products follow the determinant convention.
struct SpinorForm {
  FockModel model;
  int degree = 0;
  std::vector<Eigen::VectorXcd> comp;

  SpinorForm() = default;
  SpinorForm(const FockModel& m, int degree_) : model(m), degree(degree_) {
    if (degree < 0 || degree > 2 * m.l)
      throw std::invalid_argument("form degree out of range");
    comp.assign(binomial(2 * m.l, degree),
                Eigen::VectorXcd::Zero(m.dim()));
  }

  int n_components() const { return static_cast<int>(comp.size()); }

  double norm() const {
    double acc = 0.0;
    for (const auto& c : comp) acc += c.squaredNorm();
    return std::sqrt(acc);
  }

  SpinorForm& operator+=(const SpinorForm& o) {
    if (degree != o.degree || !(model == o.model))
      throw std::invalid_argument("form shape mismatch");
    for (std::size_t i = 0; i < comp.size(); ++i) comp[i] += o.comp[i];
    return *this;
  }

  SpinorForm& operator-=(const SpinorForm& o) {
    if (degree != o.degree || !(model == o.model))
      throw std::invalid_argument("form shape mismatch");
    for (std::size_t i = 0; i < comp.size(); ++i) comp[i] -= o.comp[i];
    return *this;
  }

  SpinorForm& operator*=(Complex z) {
    for (auto& c : comp) c *= z;
    return *this;
  }
};

inline SpinorForm operator+(SpinorForm a, const SpinorForm& b) { return a += b; }
inline SpinorForm operator-(SpinorForm a, const SpinorForm& b) { return a -= b; }
inline SpinorForm operator*(Complex z, SpinorForm a) { return a *= z; }

inline SpinorForm zero_form_like(const SpinorForm& f, int degree) {
  return SpinorForm(f.model, degree);
}

inline SpinorForm from_spinor(const Spinor& s) {
  SpinorForm f(s.model, 0);
  f.comp[0] = s.c;
  return f;
}

// Wedge-raising operator: component on J is
// sum_{i in J} (-1)^{pos_J(i)} e_i . (component on J \ {i}).
inline SpinorForm f_plus(const SpinorForm& phi) {
  const int dim = 2 * phi.model.l;
  if (phi.degree >= dim)
    throw std::invalid_argument("degree overflow in wedge-raising");
  SpinorForm out(phi.model, phi.degree + 1);
  auto subs = index_subsets(dim, phi.degree + 1);
  for (std::size_t j = 0; j < subs.size(); ++j) {
    const auto& J = subs[j];
    Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(phi.model.dim());
    for (int p = 0; p < static_cast<int>(J.size()); ++p) {
      std::vector<int> rest;
      rest.reserve(J.size() - 1);
      for (int q = 0; q < static_cast<int>(J.size()); ++q)
        if (q != p) rest.push_back(J[q]);
      const double sign = (p % 2 == 0) ? 1.0 : -1.0;
      const auto& src = phi.comp[subset_position(dim, rest)];
      acc += sign * clifford_basis_apply(phi.model, J[p], src);
    }
    out.comp[j] = acc;
  }
  return out;
}

// Contraction-lowering operator:
// component on K is -sum_{i not in K} (-1)^{pos_{K+i}(i)}
//                    sum_j omega^{ij} e_j . (component on K + {i}).
inline SpinorForm f_minus(const SymplecticSpace& s, const SpinorForm& phi) {
  if (s.l != phi.model.l) throw std::invalid_argument("space/model mismatch");
  if (phi.degree <= 0)
    throw std::invalid_argument("degree underflow in contraction-lowering");
  const int dim = 2 * phi.model.l;
  SpinorForm out(phi.model, phi.degree - 1);
  auto subs = index_subsets(dim, phi.degree - 1);
  for (std::size_t kpos = 0; kpos < subs.size(); ++kpos) {
    const auto& K = subs[kpos];
    Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(phi.model.dim());
    for (int i = 0; i < dim; ++i) {
      if (std::binary_search(K.begin(), K.end(), i)) continue;
      std::vector<int> big = K;
      big.insert(std::upper_bound(big.begin(), big.end(), i), i);
      const int p = static_cast<int>(
          std::lower_bound(big.begin(), big.end(), i) - big.begin());
      const double sign = (p % 2 == 0) ? 1.0 : -1.0;
      const auto& src = phi.comp[subset_position(dim, big)];
      Eigen::VectorXcd inner_acc = Eigen::VectorXcd::Zero(phi.model.dim());
      for (int j = 0; j < dim; ++j)
        if (s.omega_upper(i, j) != 0.0)
          inner_acc +=
              s.omega_upper(i, j) * clifford_basis_apply(phi.model, j, src);
      acc -= sign * inner_acc;
    }
    out.comp[kpos] = acc;
  }
  return out;
}

// Anticommutator of the two ladder operators; acts as i(r - l) * Id on
// degree r over the effective subspace. Out-of-range compositions vanish.
inline SpinorForm h_op(const SymplecticSpace& s, const SpinorForm& phi) {
  const int dim = 2 * phi.model.l;
  SpinorForm out(phi.model, phi.degree);
  if (phi.degree > 0) out += f_plus(f_minus(s, phi));
  if (phi.degree < dim) out += f_minus(s, f_plus(phi));
  return out;
}

// Projection of a 1-form onto the image of the wedge-raising operator.
inline SpinorForm p10(const SymplecticSpace& s, const SpinorForm& phi) {
  if (phi.degree != 1) throw std::invalid_argument("p10 expects degree 1");
  SpinorForm out = f_plus(f_minus(s, phi));
  out *= Complex(0.0, 1.0 / s.l);
  return out;
}

// Projection of a 2-form onto the summand generated by the symplectic form.
inline SpinorForm p20(const SymplecticSpace& s, const SpinorForm& phi) {
  if (phi.degree != 2) throw std::invalid_argument("p20 expects degree 2");
  SpinorForm out = f_plus(f_plus(f_minus(s, f_minus(s, phi))));
  out *= Complex(1.0 / s.l, 0.0);
  return out;
}

// The 2-form omega_{kl} eps^k wedge eps^l tensored with a spinor, in the
// Einstein-summed coefficient convention: component on {i < j} is
// (omega_ij - omega_ji) * s = 2 omega_ij * s.
inline SpinorForm omega_wedge(const SymplecticSpace& s, const Spinor& sp) {
  if (s.l != sp.model.l) throw std::invalid_argument("space/model mismatch");
  SpinorForm out(sp.model, 2);
  auto subs = index_subsets(2 * s.l, 2);
  for (std::size_t k = 0; k < subs.size(); ++k) {
    const int i = subs[k][0], j = subs[k][1];
    out.comp[k] = (s.omega_lower(i, j) - s.omega_lower(j, i)) * sp.c;
  }
  return out;
}

}  // namespace symspin
