#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "symspin/fock.hpp"
#include "symspin/symplectic.hpp"

namespace symspin {

struct Axis {
  int n = 0;
  double min = 0.0;
  double max = 0.0;
  bool periodic = false;

  double spacing() const {
    return periodic ? (max - min) / n : (max - min) / (n - 1);
  }
  double coord(int i) const { return min + i * spacing(); }
};

// Rectangular grid; node index is row-major with axis 0 slowest.
struct Grid {
  std::vector<Axis> axes;

  int dim() const { return static_cast<int>(axes.size()); }

  int n_nodes() const {
    int n = 1;
    for (const auto& a : axes) n *= a.n;
    return n;
  }

  std::vector<int> unflatten(int flat) const {
    std::vector<int> idx(dim());
    for (int a = dim() - 1; a >= 0; --a) {
      idx[a] = flat % axes[a].n;
      flat /= axes[a].n;
    }
    return idx;
  }

  int flatten(const std::vector<int>& idx) const {
    int f = 0;
    for (int a = 0; a < dim(); ++a) f = f * axes[a].n + idx[a];
    return f;
  }

  std::vector<double> coords(int flat) const {
    auto idx = unflatten(flat);
    std::vector<double> x(dim());
    for (int a = 0; a < dim(); ++a) x[a] = axes[a].coord(idx[a]);
    return x;
  }

  // True when the node keeps `margin` nodes between itself and every
  // non-periodic boundary.
  bool interior(int flat, int margin) const {
    auto idx = unflatten(flat);
    for (int a = 0; a < dim(); ++a) {
      if (axes[a].periodic) continue;
      if (idx[a] < margin || idx[a] >= axes[a].n - margin) return false;
    }
    return true;
  }
};

// Fourier differentiation matrix for an even-sized periodic axis.
inline Eigen::MatrixXd spectral_derivative_matrix(const Axis& ax) {
  if (!ax.periodic) throw std::invalid_argument("axis is not periodic");
  if (ax.n % 2 != 0)
    throw std::invalid_argument("periodic axis needs an even node count");
  const int n = ax.n;
  const double scale = 2.0 * M_PI / (ax.max - ax.min);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      if (j == k) continue;
      const int diff = j - k;
      const double sign = (diff % 2 == 0) ? 1.0 : -1.0;
      d(j, k) = scale * 0.5 * sign / std::tan(diff * M_PI / n);
    }
  return d;
}

// Derivative of every row of `values` (shape rows x n_nodes) along one grid
// axis. Non-periodic axes use second-order central differences with
// second-order one-sided closures at the ends; periodic axes differentiate
// spectrally.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>
axis_derivative(const Grid& grid, const Eigen::MatrixBase<Derived>& values,
                int axis) {
  using Mat =
      Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (axis < 0 || axis >= grid.dim()) throw std::out_of_range("grid axis");
  if (values.cols() != grid.n_nodes())
    throw std::invalid_argument("field size != node count");
  const Axis& ax = grid.axes[axis];
  if (ax.n < 3) throw std::invalid_argument("axis too short to differentiate");
  const double h = ax.spacing();
  int inner = 1;
  for (int b = axis + 1; b < grid.dim(); ++b) inner *= grid.axes[b].n;
  const int outer = grid.n_nodes() / (inner * ax.n);

  Mat out(values.rows(), values.cols());
  Eigen::MatrixXd spec;
  if (ax.periodic) spec = spectral_derivative_matrix(ax);

  auto at = [&](int o, int i, int inn) { return (o * ax.n + i) * inner + inn; };
  for (int o = 0; o < outer; ++o)
    for (int inn = 0; inn < inner; ++inn) {
      if (ax.periodic) {
        for (int i = 0; i < ax.n; ++i) {
          auto col = out.col(at(o, i, inn));
          col.setZero();
          for (int k = 0; k < ax.n; ++k)
            if (spec(i, k) != 0.0) col += spec(i, k) * values.col(at(o, k, inn));
        }
      } else {
        for (int i = 1; i + 1 < ax.n; ++i)
          out.col(at(o, i, inn)) =
              (values.col(at(o, i + 1, inn)) - values.col(at(o, i - 1, inn))) /
              (2.0 * h);
        out.col(at(o, 0, inn)) =
            (-3.0 * values.col(at(o, 0, inn)) + 4.0 * values.col(at(o, 1, inn)) -
             values.col(at(o, 2, inn))) /
            (2.0 * h);
        out.col(at(o, ax.n - 1, inn)) =
            (3.0 * values.col(at(o, ax.n - 1, inn)) -
             4.0 * values.col(at(o, ax.n - 2, inn)) +
             values.col(at(o, ax.n - 3, inn))) /
            (2.0 * h);
      }
    }
  return out;
}

// Chart of a 2l-dimensional manifold carrying a symplectic frame and the
// coefficients of a compatible torsion-free connection:
// frame[p](a,k) is the d/dx_a coefficient of the frame field e_k at node p,
// gamma[p] holds Gamma^k_{ij} with nabla_{e_i} e_j = Gamma^k_{ij} e_k.
struct ChartModel {
  std::string name;
  SymplecticSpace space;
  Grid grid;
  std::vector<Eigen::MatrixXd> frame;
  std::vector<DenseTensor> gamma;
  double radius = 0.0;
  double pole_margin = 0.0;

  int dim() const { return space.dim(); }

  // Gamma^k_{ij} as a scalar field over nodes.
  Eigen::MatrixXd gamma_field(int k, int i, int j) const {
    Eigen::MatrixXd f(1, grid.n_nodes());
    for (int p = 0; p < grid.n_nodes(); ++p) f(0, p) = gamma[p].at({k, i, j});
    return f;
  }
};

inline ChartModel flat_chart(int l, int nodes_per_axis, double extent = 1.0) {
  if (nodes_per_axis < 3)
    throw std::invalid_argument("grid too small: need >= 3 nodes per axis");
  if (extent <= 0.0) throw std::invalid_argument("extent must be positive");
  ChartModel c;
  c.name = "flat";
  c.space = SymplecticSpace::standard(l);
  c.grid.axes.assign(2 * l, Axis{nodes_per_axis, -extent, extent, false});
  c.frame.assign(c.grid.n_nodes(),
                 Eigen::MatrixXd::Identity(2 * l, 2 * l));
  c.gamma.assign(c.grid.n_nodes(), DenseTensor(2 * l, 3));
  return c;
}

inline ChartModel sphere_chart(double radius, int theta_nodes, int phi_nodes,
                               double pole_margin = 0.15) {
  if (radius <= 0.0) throw std::invalid_argument("radius must be positive");
  if (theta_nodes < 3 || phi_nodes < 4)
    throw std::invalid_argument("grid too small for the sphere chart");
  if (phi_nodes % 2 != 0)
    throw std::invalid_argument("longitude axis needs an even node count");
  if (pole_margin <= 0.0 || pole_margin >= M_PI / 2.0)
    throw std::invalid_argument("pole margin out of range");
  if (1.0 / std::sin(pole_margin) > 1e6)
    throw std::invalid_argument("pole margin too small: frame blows up");
  ChartModel c;
  c.name = "sphere";
  c.radius = radius;
  c.pole_margin = pole_margin;
  c.space = SymplecticSpace::standard(1);
  c.grid.axes = {Axis{theta_nodes, pole_margin, M_PI - pole_margin, false},
                 Axis{phi_nodes, 0.0, 2.0 * M_PI, true}};
  const int nn = c.grid.n_nodes();
  c.frame.resize(nn);
  c.gamma.resize(nn);
  for (int p = 0; p < nn; ++p) {
    const double theta = c.grid.coords(p)[0];
    Eigen::MatrixXd e = Eigen::MatrixXd::Zero(2, 2);
    e(0, 0) = 1.0 / radius;                      // e_1 = (1/r) d_theta
    e(1, 1) = 1.0 / (radius * std::sin(theta));  // e_2 = (1/(r sin)) d_phi
    c.frame[p] = e;
    DenseTensor g(2, 3);
    const double cot = std::cos(theta) / std::sin(theta) / radius;
    g.at({1, 1, 0}) = cot;   // nabla_{e_2} e_1 = cot/r * e_2
    g.at({0, 1, 1}) = -cot;  // nabla_{e_2} e_2 = -cot/r * e_1
    c.gamma[p] = g;
  }
  return c;
}

// Directional derivative of a multi-row field along the frame field e_k.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> frame_derivative(
    const ChartModel& chart,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& values,
    int k) {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const int d = chart.dim();
  if (k < 0 || k >= d) throw std::out_of_range("frame index");
  std::vector<Mat> partials(d);
  for (int a = 0; a < d; ++a)
    partials[a] = axis_derivative(chart.grid, values, a);
  Mat out = Mat::Zero(values.rows(), values.cols());
  for (int p = 0; p < chart.grid.n_nodes(); ++p)
    for (int a = 0; a < d; ++a) {
      const double coef = chart.frame[p](a, k);
      if (coef != 0.0) out.col(p) += coef * partials[a].col(p);
    }
  return out;
}

// Structure coefficients of the frame: [e_i, e_j] = sum_k c^k_{ij} e_k,
// assembled per node with grid differentiation of the frame coefficients.
inline std::vector<DenseTensor> frame_bracket(const ChartModel& chart) {
  const int d = chart.dim();
  const int nn = chart.grid.n_nodes();
  // Frame coefficients as scalar fields: row (a*d + k) holds E(a,k).
  Eigen::MatrixXd ef(d * d, nn);
  for (int p = 0; p < nn; ++p)
    for (int a = 0; a < d; ++a)
      for (int k = 0; k < d; ++k) ef(a * d + k, p) = chart.frame[p](a, k);
  std::vector<Eigen::MatrixXd> def(d);
  for (int b = 0; b < d; ++b) def[b] = axis_derivative(chart.grid, ef, b);

  std::vector<DenseTensor> out(nn, DenseTensor(d, 3));
  for (int p = 0; p < nn; ++p) {
    Eigen::MatrixXd inv = chart.frame[p].inverse();
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        Eigen::VectorXd coord = Eigen::VectorXd::Zero(d);
        for (int a = 0; a < d; ++a) {
          double acc = 0.0;
          for (int b = 0; b < d; ++b)
            acc += chart.frame[p](b, i) * def[b](a * d + j, p) -
                   chart.frame[p](b, j) * def[b](a * d + i, p);
          coord[a] = acc;
        }
        Eigen::VectorXd fr = inv * coord;
        for (int k = 0; k < d; ++k) out[p].at({k, i, j}) = fr[k];
      }
  }
  return out;
}

struct ChartValidation {
  double torsion_residual = 0.0;
  double pairing_residual = 0.0;
};

// Torsion-freeness (against finite-difference brackets) and covariant
// constancy of the pairing, evaluated away from non-periodic boundaries.
inline ChartValidation validate_chart(const ChartModel& chart,
                                      int margin = 1) {
  const int d = chart.dim();
  auto bracket = frame_bracket(chart);
  ChartValidation v;
  for (int p = 0; p < chart.grid.n_nodes(); ++p) {
    if (!chart.grid.interior(p, margin)) continue;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        for (int k = 0; k < d; ++k) {
          const double t = chart.gamma[p].at({k, i, j}) -
                           chart.gamma[p].at({k, j, i}) -
                           bracket[p].at({k, i, j});
          v.torsion_residual = std::max(v.torsion_residual, std::abs(t));
        }
        for (int k = 0; k < d; ++k) {
          double acc = 0.0;  // (nabla_{e_i} omega)(e_j, e_k)
          for (int a = 0; a < d; ++a)
            acc += -chart.gamma[p].at({a, i, j}) * chart.space.omega_lower(a, k) -
                   chart.gamma[p].at({a, i, k}) * chart.space.omega_lower(j, a);
          v.pairing_residual = std::max(v.pairing_residual, std::abs(acc));
        }
      }
  }
  return v;
}

// Curvature tensor per node: R[a][k][i][j] is the e_a component of
// R(e_i, e_j) e_k. Valid on nodes with margin >= 1.
inline std::vector<DenseTensor> curvature(const ChartModel& chart) {
  const int d = chart.dim();
  const int nn = chart.grid.n_nodes();
  auto bracket = frame_bracket(chart);

  // Directional derivatives of all Gamma components at once.
  Eigen::MatrixXd gfields(d * d * d, nn);
  for (int p = 0; p < nn; ++p) {
    int row = 0;
    for (int a = 0; a < d; ++a)
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) gfields(row++, p) = chart.gamma[p].at({a, i, j});
  }
  std::vector<Eigen::MatrixXd> dgamma(d);
  for (int k = 0; k < d; ++k)
    dgamma[k] = frame_derivative<double>(chart, gfields, k);
  auto dg = [&](int k, int a, int i, int j, int p) {
    return dgamma[k]((a * d + i) * d + j, p);
  };

  std::vector<DenseTensor> out(nn, DenseTensor(d, 4));
  for (int p = 0; p < nn; ++p)
    for (int a = 0; a < d; ++a)
      for (int k = 0; k < d; ++k)
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j) {
            double acc = dg(i, a, j, k, p) - dg(j, a, i, k, p);
            for (int b = 0; b < d; ++b)
              acc += chart.gamma[p].at({b, j, k}) * chart.gamma[p].at({a, i, b}) -
                     chart.gamma[p].at({b, i, k}) * chart.gamma[p].at({a, j, b});
            for (int cc = 0; cc < d; ++cc)
              acc -= bracket[p].at({cc, i, j}) * chart.gamma[p].at({a, cc, k});
            out[p].at({a, k, i, j}) = acc;
          }
  return out;
}

// Curvature trace sigma(e_i, e_j) = tr(V -> R(V, e_i) e_j) per node.
inline std::vector<Eigen::MatrixXd> ricci(
    const ChartModel& chart, const std::vector<DenseTensor>& curv) {
  const int d = chart.dim();
  std::vector<Eigen::MatrixXd> out(chart.grid.n_nodes());
  for (int p = 0; p < chart.grid.n_nodes(); ++p) {
    Eigen::MatrixXd s(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        double acc = 0.0;
        for (int a = 0; a < d; ++a) acc += curv[p].at({a, j, a, i});
        s(i, j) = acc;
      }
    out[p] = s;
  }
  return out;
}

// The canonical curvature-trace tensor built from sigma:
// 2(l+1) * E_{ijkn} = w_in s_jk - w_ik s_jn + w_jn s_ik - w_jk s_in
//                     + 2 s_ij w_kn.
inline DenseTensor extended_ricci(const SymplecticSpace& space,
                                  const Eigen::MatrixXd& sigma) {
  const int d = space.dim();
  if (sigma.rows() != d || sigma.cols() != d)
    throw std::invalid_argument("sigma shape mismatch");
  const auto& w = space.omega_lower;
  DenseTensor e(d, 4);
  const double denom = 2.0 * (space.l + 1);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        for (int n = 0; n < d; ++n)
          e.at({i, j, k, n}) =
              (w(i, n) * sigma(j, k) - w(i, k) * sigma(j, n) +
               w(j, n) * sigma(i, k) - w(j, k) * sigma(i, n) +
               2.0 * sigma(i, j) * w(k, n)) /
              denom;
  return e;
}

// Curvature with the frame slot lowered by the pairing:
// L[i][j][k][n] = sum_a omega_{ai} R^a_{jkn}.
inline DenseTensor lower_curvature(const SymplecticSpace& space,
                                   const DenseTensor& curv) {
  const int d = space.dim();
  DenseTensor out(d, 4);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        for (int n = 0; n < d; ++n) {
          double acc = 0.0;
          for (int a = 0; a < d; ++a)
            acc += space.omega_lower(a, i) * curv.at({a, j, k, n});
          out.at({i, j, k, n}) = acc;
        }
  return out;
}

// Raise both slots of a rank-2 lower tensor.
inline Eigen::MatrixXd raise_both(const SymplecticSpace& space,
                                  const Eigen::MatrixXd& lower) {
  const int d = space.dim();
  DenseTensor t(d, 2);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) t.at({i, j}) = lower(i, j);
  DenseTensor up = raise_index(space, raise_index(space, t, 0), 1);
  Eigen::MatrixXd out(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) out(i, j) = up.at({i, j});
  return out;
}

using NodeMask = std::vector<char>;

inline NodeMask interior_mask(const Grid& grid, int margin) {
  NodeMask m(grid.n_nodes());
  for (int p = 0; p < grid.n_nodes(); ++p) m[p] = grid.interior(p, margin);
  return m;
}

// Nodes whose coordinate along one axis lies in [lo, hi].
inline NodeMask axis_band_mask(const Grid& grid, int axis, double lo,
                               double hi) {
  NodeMask m(grid.n_nodes());
  for (int p = 0; p < grid.n_nodes(); ++p) {
    const double x = grid.coords(p)[axis];
    m[p] = (x >= lo && x <= hi);
  }
  return m;
}

inline NodeMask mask_and(const NodeMask& a, const NodeMask& b) {
  NodeMask m(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) m[i] = a[i] && b[i];
  return m;
}

enum class CurvatureClass { Weyl, Ricci, Generic };

struct ClassifyResult {
  CurvatureClass type = CurvatureClass::Generic;
  double max_sigma = 0.0;          // largest |sigma| over measured nodes
  double max_trace_defect = 0.0;   // largest |R_lowered - extended_ricci|
  bool flat = false;               // sigma and defect both vanish
};

// Splits the curvature by its trace content: Weyl when the trace vanishes,
// Ricci when the lowered curvature equals its trace reconstruction.
inline ClassifyResult classify(const ChartModel& chart, double tol,
                               const NodeMask& mask) {
  auto curv = curvature(chart);
  auto sig = ricci(chart, curv);
  ClassifyResult res;
  for (int p = 0; p < chart.grid.n_nodes(); ++p) {
    if (!mask[p]) continue;
    res.max_sigma = std::max(res.max_sigma,
                             sig[p].cwiseAbs().maxCoeff());
    DenseTensor low = lower_curvature(chart.space, curv[p]);
    DenseTensor ext = extended_ricci(chart.space, sig[p]);
    for (std::size_t q = 0; q < low.data.size(); ++q)
      res.max_trace_defect = std::max(
          res.max_trace_defect, std::abs(low.data[q] - ext.data[q]));
  }
  const bool weyl = res.max_sigma < tol;
  const bool ricci_type = res.max_trace_defect < tol;
  res.flat = weyl && ricci_type;
  if (weyl)
    res.type = CurvatureClass::Weyl;
  else if (ricci_type)
    res.type = CurvatureClass::Ricci;
  else
    res.type = CurvatureClass::Generic;
  return res;
}

inline ClassifyResult classify(const ChartModel& chart, double tol,
                               int margin = 1) {
  return classify(chart, tol, interior_mask(chart.grid, margin));
}

// Plain-text chart description: `key = value` lines with # comments.
struct ChartConfig {
  std::string chart = "flat";
  int l = 1;
  int nodes = 17;
  double extent = 1.0;
  double radius = 1.0;
  int theta_nodes = 49;
  int phi_nodes = 16;
  double pole_margin = 0.15;
  int cutoff = 8;

  static ChartConfig parse(std::istream& in) {
    ChartConfig cfg;
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
      auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      auto trim = [](std::string s) {
        const char* ws = " \t\r\n";
        auto b = s.find_first_not_of(ws);
        auto e = s.find_last_not_of(ws);
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
      };
      kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    static const char* known[] = {"chart",   "l",           "nodes",
                                  "extent",  "radius",      "theta_nodes",
                                  "phi_nodes", "pole_margin", "cutoff"};
    for (const auto& [key, val] : kv) {
      bool ok = false;
      for (const char* k : known) ok = ok || key == k;
      if (!ok) throw std::invalid_argument("unknown config key: " + key);
      if (key == "chart") cfg.chart = val;
      else if (key == "l") cfg.l = std::stoi(val);
      else if (key == "nodes") cfg.nodes = std::stoi(val);
      else if (key == "extent") cfg.extent = std::stod(val);
      else if (key == "radius") cfg.radius = std::stod(val);
      else if (key == "theta_nodes") cfg.theta_nodes = std::stoi(val);
      else if (key == "phi_nodes") cfg.phi_nodes = std::stoi(val);
      else if (key == "pole_margin") cfg.pole_margin = std::stod(val);
      else if (key == "cutoff") cfg.cutoff = std::stoi(val);
    }
    return cfg;
  }

  static ChartConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config: " + path);
    return parse(in);
  }

  ChartModel build() const {
    if (chart == "flat") return flat_chart(l, nodes, extent);
    if (chart == "sphere")
      return sphere_chart(radius, theta_nodes, phi_nodes, pole_margin);
    throw std::invalid_argument("unknown chart kind: " + chart);
  }
};

}  // namespace symspin
