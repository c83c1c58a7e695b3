#pragma once

#include <Eigen/Dense>
#include <random>
#include <stdexcept>
#include <vector>

#include "symspin/chart.hpp"
#include "symspin/forms.hpp"

namespace symspin {

// Spinor-valued field over a grid: column p holds the value at node p.
struct SpinorField {
  FockModel model;
  Eigen::MatrixXcd values;

  SpinorField() = default;
  SpinorField(const FockModel& m, const Grid& grid)
      : model(m), values(Eigen::MatrixXcd::Zero(m.dim(), grid.n_nodes())) {}

  Spinor at(int node) const { return Spinor{model, values.col(node)}; }
};

// Field of spinor-valued r-forms; comp[c] follows the component ordering of
// SpinorForm for the same degree.
struct FormField {
  FockModel model;
  int degree = 0;
  std::vector<Eigen::MatrixXcd> comp;

  FormField() = default;
  FormField(const FockModel& m, const Grid& grid, int deg)
      : model(m), degree(deg) {
    const int nc = static_cast<int>(binomial(2 * m.l, deg));
    comp.assign(nc, Eigen::MatrixXcd::Zero(m.dim(), grid.n_nodes()));
  }

  SpinorForm at(int node) const {
    SpinorForm f(model, degree);
    for (std::size_t c = 0; c < comp.size(); ++c)
      f.comp[c] = comp[c].col(node);
    return f;
  }

  void set(int node, const SpinorForm& f) {
    for (std::size_t c = 0; c < comp.size(); ++c)
      comp[c].col(node) = f.comp[c];
  }
};

// Largest pointwise norm over masked nodes.
inline double field_max_norm(const Grid& grid, const SpinorField& f,
                             const NodeMask& mask) {
  double m = 0.0;
  for (int p = 0; p < grid.n_nodes(); ++p) {
    if (!mask[p]) continue;
    m = std::max(m, f.values.col(p).norm());
  }
  return m;
}

inline double field_max_norm(const Grid& grid, const FormField& f,
                             const NodeMask& mask) {
  double m = 0.0;
  for (int p = 0; p < grid.n_nodes(); ++p) {
    if (!mask[p]) continue;
    double acc = 0.0;
    for (const auto& c : f.comp) acc += c.col(p).squaredNorm();
    m = std::max(m, std::sqrt(acc));
  }
  return m;
}

inline double field_max_norm(const Grid& grid, const SpinorField& f,
                             int margin) {
  return field_max_norm(grid, f, interior_mask(grid, margin));
}

inline double field_max_norm(const Grid& grid, const FormField& f,
                             int margin) {
  return field_max_norm(grid, f, interior_mask(grid, margin));
}

// Largest masked pointwise norm of the difference of two same-shape form
// fields.
inline double field_max_difference(const Grid& grid, const FormField& a,
                                   const FormField& b, const NodeMask& mask) {
  double m = 0.0;
  for (int p = 0; p < grid.n_nodes(); ++p) {
    if (!mask[p]) continue;
    double acc = 0.0;
    for (std::size_t c = 0; c < a.comp.size(); ++c)
      acc += (a.comp[c].col(p) - b.comp[c].col(p)).squaredNorm();
    m = std::max(m, std::sqrt(acc));
  }
  return m;
}

// Basis Clifford action applied to every column.
inline Eigen::MatrixXcd clifford_columns(const FockModel& m, int k,
                                         const Eigen::MatrixXcd& v) {
  Eigen::MatrixXcd out(v.rows(), v.cols());
  for (int c = 0; c < v.cols(); ++c)
    out.col(c) = clifford_basis_apply(m, k, v.col(c));
  return out;
}

// Covariant derivative of a spinor field along the frame field e_k:
// the frame derivative plus the quadratic connection correction
// -(i/2) sum_m [ e_{l+m}.(nabla_{e_k} e_m). - e_m.(nabla_{e_k} e_{l+m}). ].
inline SpinorField spinor_covariant_derivative(const ChartModel& chart,
                                               const SpinorField& field,
                                               int k) {
  const int l = field.model.l;
  if (chart.space.l != l) throw std::invalid_argument("chart/model mismatch");
  SpinorField out{field.model, chart.grid};
  out.values = frame_derivative<Complex>(chart, field.values, k);
  const Complex half_i(0.0, 0.5);
  for (int p = 0; p < chart.grid.n_nodes(); ++p) {
    const Eigen::VectorXcd v = field.values.col(p);
    Eigen::VectorXcd corr = Eigen::VectorXcd::Zero(v.size());
    for (int m = 0; m < l; ++m) {
      Eigen::VectorXcd grad_m = Eigen::VectorXcd::Zero(v.size());
      Eigen::VectorXcd grad_lm = Eigen::VectorXcd::Zero(v.size());
      for (int a = 0; a < 2 * l; ++a) {
        const double g_m = chart.gamma[p].at({a, k, m});
        const double g_lm = chart.gamma[p].at({a, k, l + m});
        if (g_m != 0.0) grad_m += g_m * clifford_basis_apply(field.model, a, v);
        if (g_lm != 0.0)
          grad_lm += g_lm * clifford_basis_apply(field.model, a, v);
      }
      corr += clifford_basis_apply(field.model, l + m, grad_m) -
              clifford_basis_apply(field.model, m, grad_lm);
    }
    out.values.col(p) -= half_i * corr;
  }
  return out;
}

// One-form field with components (gradient phi)_k = covariant derivative
// along e_k.
inline FormField spinor_gradient(const ChartModel& chart,
                                 const SpinorField& field) {
  FormField out(field.model, chart.grid, 1);
  for (int k = 0; k < chart.dim(); ++k)
    out.comp[k] = spinor_covariant_derivative(chart, field, k).values;
  return out;
}

// Pointwise deviation of the derivative from the product rule applied to a
// frame vector field Y (rows = frame components over nodes):
// nabla^s_{e_k}(Y.phi) - (nabla_{e_k}Y).phi - Y.(nabla^s_{e_k} phi).
inline double leibniz_residual(const ChartModel& chart,
                               const SpinorField& field,
                               const Eigen::MatrixXd& y, int k,
                               const NodeMask& mask) {
  const int d = chart.dim();
  if (y.rows() != d || y.cols() != chart.grid.n_nodes())
    throw std::invalid_argument("vector field shape mismatch");
  SpinorField yphi{field.model, chart.grid};
  for (int p = 0; p < chart.grid.n_nodes(); ++p) {
    Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(field.model.dim());
    for (int a = 0; a < d; ++a)
      if (y(a, p) != 0.0)
        acc += y(a, p) *
               clifford_basis_apply(field.model, a, field.values.col(p));
    yphi.values.col(p) = acc;
  }
  SpinorField lhs = spinor_covariant_derivative(chart, yphi, k);

  Eigen::MatrixXd dy = frame_derivative<double>(chart, y, k);
  SpinorField grad = spinor_covariant_derivative(chart, field, k);
  double res = 0.0;
  for (int p = 0; p < chart.grid.n_nodes(); ++p) {
    if (!mask[p]) continue;
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(field.model.dim());
    for (int a = 0; a < d; ++a) {
      double coef = dy(a, p);  // frame derivative of the coefficients
      for (int j = 0; j < d; ++j)
        coef += y(j, p) * chart.gamma[p].at({a, k, j});
      if (coef != 0.0)
        rhs += coef * clifford_basis_apply(field.model, a, field.values.col(p));
    }
    rhs += clifford_apply(Spinor{field.model, grad.values.col(p)}, y.col(p)).c;
    res = std::max(res, (lhs.values.col(p) - rhs).norm());
  }
  return res;
}

inline double leibniz_residual(const ChartModel& chart,
                               const SpinorField& field,
                               const Eigen::MatrixXd& y, int k,
                               int margin = 2) {
  return leibniz_residual(chart, field, y, k,
                          interior_mask(chart.grid, margin));
}

struct CurvatureActionResult {
  FormField assembled;   // projected commutator of covariant derivatives
  FormField closed;      // trace-form expression from the curvature trace
  double max_difference = 0.0;
};

// Compares the symmetric-power part of the curvature action on a spinor
// field against its closed form
//   (i/2l) * omega_{kn} * sigma^{ij} e_i.e_j.phi   on the component {k<n}.
// The assembled side forms nabla^s_i nabla^s_j - nabla^s_j nabla^s_i
// - c^k_{ij} nabla^s_k nodewise and projects onto the top summand.
inline CurvatureActionResult curvature_action(const ChartModel& chart,
                                              const SpinorField& field,
                                              int margin = 2) {
  const int d = chart.dim();
  const int l = field.model.l;
  auto bracket = frame_bracket(chart);
  auto curv = curvature(chart);
  auto sig = ricci(chart, curv);

  std::vector<SpinorField> grad(d);
  for (int k = 0; k < d; ++k)
    grad[k] = spinor_covariant_derivative(chart, field, k);
  std::vector<std::vector<SpinorField>> grad2(d);
  for (int i = 0; i < d; ++i) {
    grad2[i].resize(d);
    for (int j = 0; j < d; ++j)
      grad2[i][j] = spinor_covariant_derivative(chart, grad[j], i);
  }

  CurvatureActionResult res;
  res.assembled = FormField(field.model, chart.grid, 2);
  res.closed = FormField(field.model, chart.grid, 2);
  auto pairs = index_subsets(d, 2);

  for (int p = 0; p < chart.grid.n_nodes(); ++p) {
    SpinorForm raw(field.model, 2);
    for (std::size_t c = 0; c < pairs.size(); ++c) {
      const int i = pairs[c][0], j = pairs[c][1];
      Eigen::VectorXcd v =
          grad2[i][j].values.col(p) - grad2[j][i].values.col(p);
      for (int k = 0; k < d; ++k) {
        const double ck = bracket[p].at({k, i, j});
        if (ck != 0.0) v -= ck * grad[k].values.col(p);
      }
      raw.comp[c] = v;
    }
    res.assembled.set(p, p20(chart.space, raw));

    Eigen::MatrixXd sup = raise_both(chart.space, sig[p]);
    Eigen::VectorXcd core = Eigen::VectorXcd::Zero(field.model.dim());
    for (int i = 0; i < d; ++i) {
      Eigen::VectorXcd row = Eigen::VectorXcd::Zero(field.model.dim());
      for (int j = 0; j < d; ++j)
        if (sup(i, j) != 0.0)
          row += sup(i, j) *
                 clifford_basis_apply(field.model, j, field.values.col(p));
      core += clifford_basis_apply(field.model, i, row);
    }
    core *= Complex(0.0, 1.0) / (2.0 * l);
    SpinorForm cf(field.model, 2);
    for (std::size_t c = 0; c < pairs.size(); ++c)
      cf.comp[c] = chart.space.omega_lower(pairs[c][0], pairs[c][1]) * core;
    res.closed.set(p, cf);
  }

  for (int p = 0; p < chart.grid.n_nodes(); ++p) {
    if (!chart.grid.interior(p, margin)) continue;
    double acc = 0.0;
    for (std::size_t c = 0; c < pairs.size(); ++c)
      acc += (res.assembled.comp[c].col(p) - res.closed.comp[c].col(p))
                 .squaredNorm();
    res.max_difference = std::max(res.max_difference, std::sqrt(acc));
  }
  return res;
}

// Deterministic smooth test field: a sum of separable trigonometric profiles
// times low-level basis spinors. Evaluation is coordinate-based, so refining
// the grid samples the same underlying field.
inline SpinorField random_smooth_field(const ChartModel& chart,
                                       const FockModel& model, int n_terms,
                                       unsigned seed, int level_margin = 2) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto support = model.effective_indices(level_margin);
  SpinorField out{model, chart.grid};
  const int d = chart.dim();
  for (int t = 0; t < n_terms; ++t) {
    const int idx = support[static_cast<int>(unif(rng) * support.size()) %
                            support.size()];
    const Complex amp(2.0 * unif(rng) - 1.0, 2.0 * unif(rng) - 1.0);
    std::vector<double> freq(d), phase(d);
    for (int a = 0; a < d; ++a) {
      if (chart.grid.axes[a].periodic) {
        freq[a] = 1.0 + static_cast<int>(unif(rng) * 3.0);
        phase[a] = 2.0 * M_PI * unif(rng);
      } else {
        freq[a] = 0.5 + 1.5 * unif(rng);
        phase[a] = 2.0 * M_PI * unif(rng);
      }
    }
    for (int p = 0; p < chart.grid.n_nodes(); ++p) {
      auto x = chart.grid.coords(p);
      double prof = 1.0;
      for (int a = 0; a < d; ++a) prof *= std::cos(freq[a] * x[a] + phase[a]);
      out.values(idx, p) += amp * prof;
    }
  }
  return out;
}

}  // namespace symspin
