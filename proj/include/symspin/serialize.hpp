#pragma once

#include <iomanip>
#include <sstream>
#include <string>

#include <json.hpp>

#include "symspin/chart.hpp"
#include "symspin/forms.hpp"
#include "symspin/killing.hpp"

namespace symspin {

inline nlohmann::json to_json(const Spinor& s) {
  nlohmann::json coeffs = nlohmann::json::array();
  for (int q = 0; q < s.c.size(); ++q)
    coeffs.push_back({s.c[q].real(), s.c[q].imag()});
  return {{"l", s.model.l}, {"cutoff", s.model.cutoff}, {"coeffs", coeffs}};
}

inline Spinor spinor_from_json(const nlohmann::json& j) {
  FockModel model(j.at("l").get<int>(), j.at("cutoff").get<int>());
  const auto& coeffs = j.at("coeffs");
  if (static_cast<int>(coeffs.size()) != model.dim())
    throw std::invalid_argument("coefficient count does not match the model");
  Eigen::VectorXcd c(model.dim());
  for (int q = 0; q < model.dim(); ++q)
    c[q] = Complex(coeffs[q][0].get<double>(), coeffs[q][1].get<double>());
  return Spinor{model, c};
}

// Component keys are the 1-based frame indices of the basis covector tuple,
// comma-joined; the empty key is the single degree-0 component.
inline std::string component_key(const std::vector<int>& subset) {
  std::ostringstream os;
  for (std::size_t q = 0; q < subset.size(); ++q) {
    if (q) os << ',';
    os << subset[q] + 1;
  }
  return os.str();
}

inline nlohmann::json to_json(const SpinorForm& f) {
  nlohmann::json comps = nlohmann::json::object();
  auto subsets = index_subsets(2 * f.model.l, f.degree);
  for (std::size_t c = 0; c < subsets.size(); ++c)
    comps[component_key(subsets[c])] = to_json(Spinor{f.model, f.comp[c]});
  return {{"degree", f.degree}, {"components", comps}};
}

inline SpinorForm form_from_json(const nlohmann::json& j) {
  const int degree = j.at("degree").get<int>();
  const auto& comps = j.at("components");
  if (comps.empty()) throw std::invalid_argument("no components");
  Spinor first = spinor_from_json(comps.begin().value());
  SpinorForm f(first.model, degree);
  auto subsets = index_subsets(2 * first.model.l, degree);
  if (comps.size() != subsets.size())
    throw std::invalid_argument("component count does not match the degree");
  for (std::size_t c = 0; c < subsets.size(); ++c) {
    Spinor s = spinor_from_json(comps.at(component_key(subsets[c])));
    f.comp[c] = s.c;
  }
  return f;
}

inline nlohmann::json to_json(const Certificate& cert) {
  return {{"kind", cert.kind},
          {"bound", cert.bound},
          {"tolerance", cert.tolerance},
          {"params",
           {{"r", cert.r},
            {"n_max", cert.n_max},
            {"theta_nodes", cert.theta_nodes},
            {"fourier_modes", cert.fourier_modes},
            {"cutoff", cert.cutoff},
            {"margin", cert.margin}}},
          {"verdict", cert.verdict},
          {"regression_id", cert.regression_id}};
}

inline Certificate certificate_from_json(const nlohmann::json& j) {
  Certificate cert;
  cert.kind = j.at("kind").get<std::string>();
  cert.bound = j.at("bound").get<double>();
  cert.tolerance = j.at("tolerance").get<double>();
  const auto& p = j.at("params");
  cert.r = p.at("r").get<double>();
  cert.n_max = p.at("n_max").get<int>();
  cert.theta_nodes = p.at("theta_nodes").get<int>();
  cert.fourier_modes = p.at("fourier_modes").get<int>();
  cert.cutoff = p.at("cutoff").get<int>();
  cert.margin = p.at("margin").get<int>();
  cert.verdict = j.at("verdict").get<bool>();
  cert.regression_id = j.at("regression_id").get<std::string>();
  return cert;
}

// Node table of a per-node matrix field: coordinates first, then the matrix
// entries in row-major order.
inline std::string matrix_field_csv(const ChartModel& chart,
                                    const std::vector<Eigen::MatrixXd>& field,
                                    const std::string& prefix) {
  std::ostringstream os;
  os << std::setprecision(17);
  for (int a = 0; a < chart.grid.dim(); ++a) os << "x" << a << ",";
  const int rows = field.empty() ? 0 : static_cast<int>(field[0].rows());
  const int cols = field.empty() ? 0 : static_cast<int>(field[0].cols());
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      os << prefix << i + 1 << j + 1;
      if (i + 1 != rows || j + 1 != cols) os << ",";
    }
  os << "\n";
  for (int p = 0; p < chart.grid.n_nodes(); ++p) {
    auto x = chart.grid.coords(p);
    for (double v : x) os << v << ",";
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) {
        os << field[p](i, j);
        if (i + 1 != rows || j + 1 != cols) os << ",";
      }
    os << "\n";
  }
  return os.str();
}

}  // namespace symspin
