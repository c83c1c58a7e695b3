#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "symspin/killing.hpp"

using namespace symspin;
using Catch::Approx;

namespace {

// phi(x) = phi0 + sum_k x_k e_k.chi on a flat chart. Linear in the
// coordinates, so finite differences reproduce its gradient exactly and the
// covariant gradient is the raised one-form built from chi.
SpinorField raised_gradient_field(const ChartModel& chart,
                                  const FockModel& model,
                                  const Eigen::VectorXcd& phi0,
                                  const Eigen::VectorXcd& chi) {
  SpinorField f{model, chart.grid};
  std::vector<Eigen::VectorXcd> step(chart.dim());
  for (int k = 0; k < chart.dim(); ++k)
    step[k] = clifford_basis_apply(model, k, chi);
  for (int p = 0; p < chart.grid.n_nodes(); ++p) {
    auto x = chart.grid.coords(p);
    f.values.col(p) = phi0;
    for (int k = 0; k < chart.dim(); ++k)
      f.values.col(p) += x[k] * step[k];
  }
  return f;
}

Eigen::VectorXcd effective_vector(const FockModel& model, int margin,
                                  unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(model.dim());
  for (int q = 0; q < model.dim(); ++q)
    if (model.in_effective_subspace(q, margin))
      v[q] = Complex(gauss(rng), gauss(rng));
  return v;
}

}  // namespace

TEST_CASE("candidate numbers solve the quadratic level condition") {
  FockModel model(1, 8);
  auto cands = candidate_spectrum(RicciData::isotropic(1, 1.0), model, 6);
  REQUIRE(cands.size() == 12);
  for (const auto& c : cands) {
    const Complex q = 2.0 * c.lambda * c.lambda;
    const double expect = -(2.0 * c.hermite_level + 1.0);
    REQUIRE(std::abs(q - expect) < 1e-12);
    REQUIRE(std::abs(c.lambda.real()) < 1e-14);
    REQUIRE(c.residual < 1e-10);
  }
  // Pairs ascend in magnitude with the positive-imaginary member first.
  for (int n = 0; n < 6; ++n) {
    REQUIRE(cands[2 * n].hermite_level == n);
    REQUIRE(cands[2 * n].lambda.imag() > 0.0);
    REQUIRE(cands[2 * n + 1].lambda == -cands[2 * n].lambda);
    if (n > 0)
      REQUIRE(std::abs(cands[2 * n].lambda) >
              std::abs(cands[2 * n - 2].lambda));
  }
  REQUIRE(cands[0].descriptor == "hermite-level-0");
}

TEST_CASE("candidate numbers scale with the trace coefficient") {
  FockModel model(1, 8);
  auto cands = candidate_spectrum(RicciData::isotropic(1, 0.5), model, 2);
  REQUIRE(cands.size() == 4);
  for (const auto& c : cands) {
    // 2 r lambda^2 = -(2n+1) at r = 2, i.e. trace coefficient 1/r.
    const Complex q = 4.0 * c.lambda * c.lambda;
    REQUIRE(std::abs(q + (2.0 * c.hermite_level + 1.0)) < 1e-12);
  }
  REQUIRE(std::abs(cands[2].lambda - Complex(0.0, std::sqrt(0.75))) < 1e-12);
}

TEST_CASE("vanishing trace admits only the zero number") {
  FockModel model(2, 6);
  auto cands = candidate_spectrum(RicciData::zero(2), model, 3);
  REQUIRE(cands.size() == 1);
  REQUIRE(cands[0].lambda == Complex(0.0, 0.0));
  REQUIRE(cands[0].descriptor == "vanishing-trace");
}

TEST_CASE("candidate enumeration rejects unsupported inputs") {
  FockModel model(1, 8);
  REQUIRE(candidate_spectrum(RicciData::isotropic(1, 1.0), model, 0).empty());
  REQUIRE_THROWS_AS(candidate_spectrum(RicciData::isotropic(1, 1.0), model, 7),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(
      candidate_spectrum(RicciData::isotropic(1, 1.0), model, -1),
      std::invalid_argument);

  RicciData wobbly = RicciData::isotropic(1, 1.0);
  wobbly.max_deviation = 1.0;
  REQUIRE_THROWS_AS(candidate_spectrum(wobbly, model, 2),
                    std::invalid_argument);

  RicciData skew = RicciData::isotropic(1, 1.0);
  skew.sigma(1, 1) = 2.0;
  REQUIRE_THROWS_AS(candidate_spectrum(skew, model, 2), std::invalid_argument);

  FockModel model2(2, 6);
  REQUIRE_THROWS_AS(
      candidate_spectrum(RicciData::isotropic(2, 1.0), model2, 2),
      std::invalid_argument);
}

TEST_CASE("dirac operator annihilates constants on flat charts") {
  ChartModel c = flat_chart(1, 7);
  FockModel model(1, 8);
  SpinorField f{model, c.grid};
  Eigen::VectorXcd v = effective_vector(model, 2, 5u);
  for (int p = 0; p < c.grid.n_nodes(); ++p) f.values.col(p) = v;
  SpinorField d = dirac(c, f);
  REQUIRE(d.values.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("dirac operator matches the contraction of an exact gradient") {
  ChartModel c = flat_chart(1, 7);
  FockModel model(1, 8);
  Eigen::VectorXcd phi0 = effective_vector(model, 3, 13u);
  Eigen::VectorXcd chi = effective_vector(model, 3, 14u);
  SpinorField f = raised_gradient_field(c, model, phi0, chi);
  SpinorField d = dirac(c, f);
  // The covariant gradient is the raised one-form of chi, whose contraction
  // returns i*l*chi at every node.
  const Eigen::VectorXcd expect = Complex(0.0, 1.0) * chi;
  for (int p = 0; p < c.grid.n_nodes(); ++p)
    REQUIRE((d.values.col(p) - expect).norm() < 1e-11);
}

TEST_CASE("twistor part of a raised gradient vanishes") {
  ChartModel c = flat_chart(1, 9);
  FockModel model(1, 8);
  Eigen::VectorXcd phi0 = effective_vector(model, 3, 21u);
  Eigen::VectorXcd chi = effective_vector(model, 3, 22u);
  SpinorField f = raised_gradient_field(c, model, phi0, chi);
  FormField t = twistor(c, f);
  auto mask = interior_mask(c.grid, 1);
  REQUIRE(field_max_norm(c.grid, t, mask) < 1e-11);
}

TEST_CASE("generic sphere sections have twistor content") {
  ChartModel c = sphere_chart(1.0, 25, 8, 0.3);
  FockModel model(1, 8);
  SpinorField f = random_smooth_field(c, model, 4, 3u);
  FormField t = twistor(c, f);
  auto mask = interior_mask(c.grid, 2);
  REQUIRE(field_max_norm(c.grid, t, mask) > 1e-2);
}

TEST_CASE("killing residual vanishes exactly on flat constants") {
  ChartModel c = flat_chart(1, 7);
  FockModel model(1, 8);
  SpinorField f{model, c.grid};
  Eigen::VectorXcd v = effective_vector(model, 2, 9u);
  for (int p = 0; p < c.grid.n_nodes(); ++p) f.values.col(p) = v;
  REQUIRE(killing_residual(c, f, Complex(0.0, 0.0)) < 1e-13);
  REQUIRE(killing_residual(c, f, Complex(1.0, 0.0)) > 0.1);
}

TEST_CASE("sphere candidate sections fail the defining equation pointwise") {
  // Constant single-level sections with the matching candidate number are the
  // natural ansatz, and their residual does not decay under refinement.
  auto run = [](int nodes, int level) {
    ChartModel c = sphere_chart(1.0, nodes, 8, M_PI / 8.0);
    FockModel model(1, 8);
    SpinorField f{model, c.grid};
    for (int p = 0; p < c.grid.n_nodes(); ++p) f.values(level, p) = 1.0;
    const Complex lambda(0.0, std::sqrt((2.0 * level + 1.0) / 2.0));
    auto mask = axis_band_mask(c.grid, 0, M_PI / 4.0, 3.0 * M_PI / 4.0);
    return killing_residual(c, f, lambda, mask);
  };
  for (int level : {0, 1}) {
    const double coarse = run(25, level), fine = run(49, level);
    REQUIRE(coarse > 0.3);
    REQUIRE(fine > 0.3);
    REQUIRE(fine / coarse > 0.8);
    REQUIRE(fine / coarse < 1.2);
  }
}

TEST_CASE("prolongation residual vanishes for matched numbers") {
  FockModel model(1, 8);
  RicciData ric = RicciData::isotropic(1, 1.0);
  for (int n = 0; n <= 5; ++n) {
    Spinor s{model, Eigen::VectorXcd::Zero(model.dim())};
    s.c[n] = 1.0;
    const Complex lambda(0.0, std::sqrt((2.0 * n + 1.0) / 2.0));
    REQUIRE(prolongation_residual(s, ric, lambda) < 1e-12);
  }
}

TEST_CASE("prolongation residual separates mismatched levels exactly") {
  FockModel model(1, 8);
  RicciData ric = RicciData::isotropic(1, 1.0);
  for (int n = 0; n <= 4; ++n)
    for (int m = 0; m <= 4; ++m) {
      Spinor s{model, Eigen::VectorXcd::Zero(model.dim())};
      s.c[n] = 1.0;
      const Complex lambda(0.0, std::sqrt((2.0 * m + 1.0) / 2.0));
      REQUIRE(prolongation_residual(s, ric, lambda) ==
              Approx(2.0 * std::abs(m - n)).margin(1e-11));
    }
}

TEST_CASE("zero trace makes the prolongation trivial at the zero number") {
  FockModel model(2, 6);
  RicciData ric = RicciData::zero(2);
  Spinor s{model, effective_vector(model, 2, 31u)};
  REQUIRE(prolongation_residual(s, ric, Complex(0.0, 0.0)) < 1e-14);
}

TEST_CASE("azimuthal block reproduces the covariant derivative exactly") {
  const double r = 1.0;
  const int J = 25, P = 12, cutoff = 8, nlev = 6, m = 2;
  const double margin = 0.3;
  const Complex lambda(0.0, 0.4);
  ChartModel chart = sphere_chart(r, J, P, margin);
  FockModel model(1, cutoff);

  // Smooth per-level profiles, embedded as u(theta) e^{i m phi}.
  auto profile = [](int n, double theta) {
    return Complex(std::cos(theta + 0.4 * n),
                   0.3 * std::sin(theta + 0.1 * n));
  };
  SpinorField f{model, chart.grid};
  Eigen::VectorXcd stacked(J * nlev);
  for (int j = 0; j < J; ++j) {
    const double theta = chart.grid.axes[0].coord(j);
    for (int n = 0; n < nlev; ++n) stacked[j * nlev + n] = profile(n, theta);
  }
  for (int p = 0; p < chart.grid.n_nodes(); ++p) {
    auto x = chart.grid.coords(p);
    const int j = chart.grid.unflatten(p)[0];
    const Complex phase = std::exp(Complex(0.0, m * x[1]));
    for (int n = 0; n < nlev; ++n)
      f.values(n, p) = phase * stacked[j * nlev + n];
  }

  auto op = sphere_mode_operator(r, lambda, m, J, cutoff, margin);
  Eigen::VectorXcd applied = op * stacked;
  FormField grad = spinor_gradient(chart, f);

  const int jp = 1;
  const double phi = chart.grid.axes[1].coord(jp);
  const Complex phase = std::exp(Complex(0.0, m * phi));
  const int row0 = (J - 1) * cutoff;
  for (int j = 0; j < J; ++j) {
    const int p = chart.grid.flatten({j, jp});
    Eigen::VectorXcd direct =
        grad.comp[1].col(p) -
        lambda * clifford_basis_apply(model, 1, f.values.col(p));
    for (int q = 0; q < cutoff; ++q)
      REQUIRE(std::abs(applied[row0 + j * cutoff + q] - direct[q] / phase) <
              1e-12);
  }

  // Polar cells agree with the analytic midpoint samples to second order.
  Eigen::MatrixXd x1 = position_matrix(cutoff);
  const double h = chart.grid.axes[0].spacing();
  double err = 0.0;
  for (int j = 0; j + 1 < J; ++j) {
    const double mid = chart.grid.axes[0].coord(j) + 0.5 * h;
    Eigen::VectorXcd u(cutoff), du(cutoff);
    u.setZero();
    du.setZero();
    for (int n = 0; n < nlev; ++n) {
      u[n] = profile(n, mid);
      du[n] = Complex(-std::sin(mid + 0.4 * n), 0.3 * std::cos(mid + 0.1 * n));
    }
    Eigen::VectorXcd expect =
        du / r - lambda * Complex(0.0, 1.0) * (x1 * u);
    for (int q = 0; q < cutoff; ++q)
      err = std::max(err, std::abs(applied[j * cutoff + q] - expect[q]));
  }
  REQUIRE(err < 0.02);
}

TEST_CASE("mode operator guards its parameters") {
  REQUIRE_THROWS_AS(sphere_mode_operator(-1.0, Complex(0, 1), 0, 16, 8, 0.15),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(sphere_mode_operator(1.0, Complex(0, 1), 0, 3, 8, 0.15),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(sphere_mode_operator(1.0, Complex(0, 1), 0, 16, 3, 0.15),
                    std::invalid_argument);
}

TEST_CASE("iterative smallest singular value matches dense decomposition") {
  auto op = sphere_mode_operator(1.0, Complex(0.0, 0.7), 1, 12, 6, 0.15);
  const double dense = smallest_singular_dense(Eigen::MatrixXcd(op));
  const double iter = smallest_singular_gram(op);
  REQUIRE(iter == Approx(dense).margin(1e-8));

  ChartModel c = flat_chart(1, 5);
  FockModel model(1, 4);
  auto fop = flat_killing_operator(c, model, Complex(0.3, 0.0));
  const double fdense = smallest_singular_dense(Eigen::MatrixXcd(fop));
  const double fiter = smallest_singular_gram(fop);
  REQUIRE(fiter == Approx(fdense).margin(1e-8));
  REQUIRE(fdense > 1e-3);
}

TEST_CASE("assembled flat operator sees the constant kernel") {
  ChartModel c = flat_chart(1, 7);
  FockModel model(1, 6);
  auto op = flat_killing_operator(c, model, Complex(0.0, 0.0));
  REQUIRE(smallest_singular_gram(op) < 1e-6);
}

TEST_CASE("nonzero numbers have no flat solutions") {
  ChartModel c = flat_chart(1, 9);
  FockModel model(1, 6);
  auto op = flat_killing_operator(c, model, Complex(0.3, 0.0));
  REQUIRE(smallest_singular_gram(op) > 0.03);
}

TEST_CASE("flat operator requires a flat chart") {
  ChartModel c = sphere_chart(1.0, 9, 8, 0.3);
  FockModel model(1, 4);
  REQUIRE_THROWS_AS(flat_killing_operator(c, model, Complex(0.0, 0.0)),
                    std::invalid_argument);
}

TEST_CASE("flat kernel analysis certifies rigidity") {
  ChartModel c = flat_chart(1, 9);
  FockModel model(1, 6);
  RigidityResult res = flat_rigidity(c, model);
  REQUIRE(res.kernel_dimension == 6);
  REQUIRE(res.expected_dimension == 6);
  REQUIRE(res.kernel_constancy < 1e-10);
  REQUIRE(res.smallest_nonzero > 1.0);
  REQUIRE(res.candidates.size() == 1);
  REQUIRE(std::abs(res.candidates[0].lambda) == 0.0);
  REQUIRE(res.certificate.kind == "Rigidity");
  REQUIRE(res.certificate.verdict);
  REQUIRE(res.certificate.regression_id == "flat-l1-c6-g9");
}

TEST_CASE("rigidity kernel counts all constants in two modes") {
  ChartModel c = flat_chart(2, 3);
  FockModel model(2, 4);
  RigidityResult res = flat_rigidity(c, model);
  REQUIRE(res.kernel_dimension == 16);
  REQUIRE(res.expected_dimension == 16);
  REQUIRE(res.kernel_constancy < 1e-10);
  REQUIRE(res.certificate.verdict);
}

TEST_CASE("planted kernels flip the scan verdict to existence") {
  auto op = sphere_mode_operator(1.0, Complex(0.0, 0.7), 1, 16, 6, 0.15);
  Eigen::MatrixXcd dense(op);
  std::mt19937 rng(42u);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXcd v(dense.cols());
  for (int q = 0; q < v.size(); ++q) v[q] = Complex(gauss(rng), gauss(rng));
  v.normalize();
  dense -= (dense * v) * v.adjoint();
  Eigen::SparseMatrix<Complex> planted = dense.sparseView();
  const double s = smallest_singular_gram(planted);
  REQUIRE(s < 1e-5);

  Certificate cert;
  nonexistence_verdict(cert, s, 0.0, 1.0, Tolerances::defaults());
  REQUIRE(cert.kind == "Existence");
  REQUIRE_FALSE(cert.verdict);

  Certificate clean;
  nonexistence_verdict(clean, smallest_singular_gram(op), 0.0, 1.0,
                       Tolerances::defaults());
  REQUIRE(clean.kind == "Nonexistence");
  REQUIRE(clean.verdict);
}

TEST_CASE("sphere scan certifies a kernel-free candidate sweep") {
  NonexistenceScan scan = sphere_nonexistence(1.0, 1, 32, 8);
  REQUIRE(scan.candidates.size() == 4);
  for (const auto& cs : scan.candidates) {
    REQUIRE(cs.s_min_base > 1e-3);
    REQUIRE(cs.drift < 0.2);
    REQUIRE(cs.s_by_mode.size() == 9);
  }
  REQUIRE(scan.certificate.kind == "Nonexistence");
  REQUIRE(scan.certificate.verdict);
  REQUIRE(scan.certificate.bound > 1e-3);
  REQUIRE(scan.certificate.regression_id == "sphere-r1-n1-t32-f8-c8");
  REQUIRE(scan.patch_gradient_floor > 1e-2);
  REQUIRE(scan.patch_ode_residual < 1e-6);
}

TEST_CASE("wider mode sweeps only tighten the bound") {
  auto bound = [](int modes) {
    return sphere_nonexistence(1.0, 0, 16, modes).certificate.bound;
  };
  const double b8 = bound(8), b16 = bound(16), b32 = bound(32);
  REQUIRE(b16 <= b8 + 1e-12);
  REQUIRE(b32 <= b16 + 1e-12);
  REQUIRE(b32 > 1e-3);
}

TEST_CASE("scan rejects malformed sweep parameters") {
  REQUIRE_THROWS_AS(sphere_nonexistence(1.0, 1, 32, 7), std::invalid_argument);
  REQUIRE_THROWS_AS(sphere_nonexistence(1.0, 1, 32, 0), std::invalid_argument);
  REQUIRE_THROWS_AS(sphere_nonexistence(1.0, 1, 4, 8), std::invalid_argument);
}

TEST_CASE("transport solution satisfies its defining equation") {
  const Complex lambda(0.0, std::sqrt(0.5));
  REQUIRE(transport_ode_residual(1.0, lambda, 0.15) < 1e-6);
  const double floor_val = transport_gradient_floor(1.0, lambda, 0.15);
  REQUIRE(floor_val == Approx(std::abs(lambda) * 0.15).epsilon(1e-6));
}

TEST_CASE("characterization accepts flat constants") {
  ChartModel c = flat_chart(1, 9);
  FockModel model(1, 8);
  SpinorField f{model, c.grid};
  Eigen::VectorXcd v = effective_vector(model, 2, 51u);
  for (int p = 0; p < c.grid.n_nodes(); ++p) f.values.col(p) = v;
  auto rep = characterize(c, f);
  REQUIRE(rep.is_killing);
  REQUIRE(rep.dirac_eigen);
  REQUIRE(rep.twistor_kernel);
  REQUIRE(rep.equivalence_holds);
  REQUIRE(std::abs(rep.lambda) < 1e-10);
  REQUIRE(std::abs(rep.mu) < 1e-10);
  REQUIRE(rep.number_relation_error < 1e-10);
}

TEST_CASE("characterization rejects generic fields consistently") {
  ChartModel c = sphere_chart(1.0, 25, 8, 0.3);
  FockModel model(1, 8);
  SpinorField f = random_smooth_field(c, model, 4, 61u);
  auto rep = characterize(c, f);
  REQUIRE_FALSE(rep.is_killing);
  REQUIRE_FALSE(rep.dirac_eigen);
  REQUIRE_FALSE(rep.twistor_kernel);
  REQUIRE(rep.equivalence_holds);
}

TEST_CASE("twistor membership alone does not satisfy the equation") {
  ChartModel c = flat_chart(1, 9);
  FockModel model(1, 8);
  Eigen::VectorXcd phi0 = effective_vector(model, 3, 71u);
  Eigen::VectorXcd chi = effective_vector(model, 3, 72u);
  SpinorField f = raised_gradient_field(c, model, phi0, chi);
  auto rep = characterize(c, f, 1e-6, 1);
  REQUIRE(rep.twistor_kernel);
  REQUIRE_FALSE(rep.dirac_eigen);
  REQUIRE_FALSE(rep.is_killing);
  REQUIRE(rep.equivalence_holds);
}

TEST_CASE("characterization equivalence holds across a mixed corpus") {
  FockModel model(1, 8);
  ChartModel flat = flat_chart(1, 9);
  ChartModel sphere = sphere_chart(1.0, 25, 8, 0.3);
  int checked = 0;
  for (unsigned seed : {101u, 102u, 103u}) {
    SpinorField f{model, flat.grid};
    Eigen::VectorXcd v = effective_vector(model, 2, seed);
    for (int p = 0; p < flat.grid.n_nodes(); ++p) f.values.col(p) = v;
    REQUIRE(characterize(flat, f).equivalence_holds);
    ++checked;
  }
  for (unsigned seed : {201u, 202u}) {
    REQUIRE(characterize(flat, random_smooth_field(flat, model, 3, seed))
                .equivalence_holds);
    REQUIRE(characterize(sphere, random_smooth_field(sphere, model, 3, seed))
                .equivalence_holds);
    checked += 2;
  }
  REQUIRE(checked == 7);
  SpinorField zero{model, flat.grid};
  REQUIRE_THROWS_AS(characterize(flat, zero), std::invalid_argument);
}
