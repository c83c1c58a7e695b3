#pragma once

#include <chrono>
#include <random>
#include <string>
#include <vector>

#include "symspin/forms.hpp"
#include "symspin/tolerances.hpp"

namespace symspin {

struct IdentityResult {
  std::string name;
  double error = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

namespace detail {

inline Eigen::VectorXcd random_effective_spinor(const FockModel& m,
                                                std::mt19937& rng,
                                                int margin) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(m.dim());
  for (int idx : m.effective_indices(margin))
    v[idx] = Complex(gauss(rng), gauss(rng));
  return v.normalized();
}

inline SpinorForm random_effective_form(const FockModel& m, int degree,
                                        std::mt19937& rng, int margin) {
  SpinorForm f(m, degree);
  for (auto& c : f.comp) c = random_effective_spinor(m, rng, margin);
  return f;
}

}  // namespace detail

// The operator-identity suite shared by the command-line front end and the
// acceptance harness: commutation of the Clifford action, the
// degree-anticommutator value, the square of the raising map, the projector
// annihilation property, and the contraction-inverse relation.
inline std::vector<IdentityResult> identity_suite(
    int l, int cutoff, const Tolerances& tol = Tolerances::defaults(),
    unsigned seed = 20260823u, int trials = 6) {
  FockModel model(l, cutoff);
  SymplecticSpace space = SymplecticSpace::standard(l);
  std::mt19937 rng(seed);
  std::vector<IdentityResult> out;
  const int d = 2 * l;

  {
    IdentityResult res{"clifford-commutation", 0.0, tol.clifford, false};
    auto basis = model.effective_indices(2);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int idx : basis) {
          Eigen::VectorXcd v = Eigen::VectorXcd::Zero(model.dim());
          v[idx] = 1.0;
          Eigen::VectorXcd lhs =
              clifford_basis_apply(model, i, clifford_basis_apply(model, j, v)) -
              clifford_basis_apply(model, j, clifford_basis_apply(model, i, v));
          lhs += Complex(0.0, space.omega_lower(i, j)) * v;
          res.error = std::max(res.error, lhs.norm());
        }
    res.pass = res.error < res.tolerance;
    out.push_back(res);
  }

  {
    IdentityResult res{"degree-anticommutator", 0.0, tol.h_relation, false};
    for (int degree = 0; degree <= d; ++degree)
      for (int t = 0; t < trials; ++t) {
        SpinorForm f = detail::random_effective_form(model, degree, rng, 2);
        SpinorForm h = h_op(space, f);
        SpinorForm expect = Complex(0.0, double(degree - l)) * f;
        res.error = std::max(res.error, (h - expect).norm());
      }
    res.pass = res.error < res.tolerance;
    out.push_back(res);
  }

  {
    IdentityResult res{"raising-square-pairing", 0.0, tol.clifford, false};
    for (int t = 0; t < trials; ++t) {
      Eigen::VectorXcd v = detail::random_effective_spinor(model, rng, 2);
      Spinor s{model, v};
      SpinorForm lhs = f_plus(f_plus(from_spinor(s)));
      SpinorForm rhs = Complex(0.0, -0.5) * omega_wedge(space, s);
      res.error = std::max(res.error, (lhs - rhs).norm());
    }
    res.pass = res.error < res.tolerance;
    out.push_back(res);
  }

  {
    IdentityResult res{"lowering-annihilates-twistor-part", 0.0,
                       tol.projection, false};
    for (int t = 0; t < trials; ++t) {
      SpinorForm eta = detail::random_effective_form(model, 1, rng, 3);
      SpinorForm tw = eta - p10(space, eta);
      res.error = std::max(res.error, f_minus(space, tw).norm());
    }
    res.pass = res.error < res.tolerance;
    out.push_back(res);
  }

  {
    IdentityResult res{"contraction-inverse", 0.0, tol.projection, false};
    for (int t = 0; t < trials; ++t) {
      Eigen::VectorXcd v = detail::random_effective_spinor(model, rng, 3);
      SpinorForm psi = f_plus(from_spinor(Spinor{model, v}));
      SpinorForm lhs = Complex(-1.0, 0.0) * f_plus(f_minus(space, psi));
      SpinorForm rhs = Complex(0.0, double(l)) * psi;
      res.error = std::max(res.error, (lhs - rhs).norm());
    }
    res.pass = res.error < res.tolerance;
    out.push_back(res);
  }

  {
    IdentityResult res{"projector-fixes-raised-forms", 0.0, tol.projection,
                       false};
    for (int t = 0; t < trials; ++t) {
      Eigen::VectorXcd v = detail::random_effective_spinor(model, rng, 3);
      SpinorForm psi = f_plus(from_spinor(Spinor{model, v}));
      res.error = std::max(res.error, (p10(space, psi) - psi).norm());
    }
    res.pass = res.error < res.tolerance;
    out.push_back(res);
  }

  return out;
}

inline bool all_pass(const std::vector<IdentityResult>& results) {
  for (const auto& r : results)
    if (!r.pass) return false;
  return true;
}

}  // namespace symspin
