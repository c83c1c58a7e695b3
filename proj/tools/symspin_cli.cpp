#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "symspin/killing.hpp"
#include "symspin/serialize.hpp"
#include "symspin/verify.hpp"

using symspin::Complex;
using ojson = nlohmann::ordered_json;

namespace {

std::string timestamp_utc() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string fmt_complex(Complex z) {
  std::ostringstream os;
  os << std::setprecision(12) << z.real() << (z.imag() < 0.0 ? " - " : " + ")
     << std::abs(z.imag()) << "i";
  return os.str();
}

std::string fmt_pass(bool ok) { return ok ? "pass" : "fail"; }

struct OutputOptions {
  std::string format = "json";
  std::string out_path;
};

// Every command renders one report object; the timestamp is appended last so
// that it occupies a single isolated line of the serialized output.
void emit(const OutputOptions& opt, ojson report, const std::string& text,
          const std::string& csv) {
  report["timestamp"] = timestamp_utc();
  std::string payload;
  if (opt.format == "json")
    payload = report.dump(2) + "\n";
  else if (opt.format == "text")
    payload = text;
  else
    payload = csv;
  if (opt.out_path.empty()) {
    std::cout << payload;
  } else {
    std::ofstream out(opt.out_path);
    if (!out) throw std::invalid_argument("cannot write: " + opt.out_path);
    out << payload;
  }
}

ojson candidate_json(const symspin::KillingCandidate& c) {
  return {{"lambda", {c.lambda.real(), c.lambda.imag()}},
          {"hermite_level", c.hermite_level},
          {"descriptor", c.descriptor}};
}

// --- verify ----------------------------------------------------------------

struct VerifyParams {
  int l = 1;
  int cutoff = 8;
  unsigned seed = 20260823u;
  int trials = 6;
};

ojson run_verify(const VerifyParams& p, const symspin::Tolerances& tol) {
  auto results = symspin::identity_suite(p.l, p.cutoff, tol, p.seed, p.trials);
  ojson rep;
  rep["command"] = "verify";
  rep["params"] = {{"l", p.l},
                   {"cutoff", p.cutoff},
                   {"seed", p.seed},
                   {"trials", p.trials}};
  ojson arr = ojson::array();
  for (const auto& r : results)
    arr.push_back({{"name", r.name},
                   {"error", r.error},
                   {"tolerance", r.tolerance},
                   {"pass", r.pass}});
  rep["results"] = arr;
  rep["verdict"] = symspin::all_pass(results);
  return rep;
}

std::string verify_text(const ojson& rep) {
  std::ostringstream os;
  os << "operator identity suite  l=" << rep["params"]["l"]
     << " cutoff=" << rep["params"]["cutoff"] << "\n";
  for (const auto& r : rep["results"])
    os << "  " << fmt_pass(r["pass"].get<bool>()) << "  " << std::left
       << std::setw(34) << r["name"].get<std::string>() << std::right
       << std::scientific << std::setprecision(3)
       << " error " << r["error"].get<double>() << "  tol "
       << r["tolerance"].get<double>() << "\n";
  os << "verdict: " << fmt_pass(rep["verdict"].get<bool>()) << "\n";
  return os.str();
}

std::string verify_csv(const ojson& rep) {
  std::ostringstream os;
  os << "name,error,tolerance,pass\n" << std::setprecision(17);
  for (const auto& r : rep["results"])
    os << r["name"].get<std::string>() << "," << r["error"].get<double>()
       << "," << r["tolerance"].get<double>() << ","
       << (r["pass"].get<bool>() ? 1 : 0) << "\n";
  return os.str();
}

// --- spectrum --------------------------------------------------------------

struct SpectrumParams {
  std::string geometry = "sphere";
  double radius = 1.0;
  int count = 3;
  int cutoff = 8;
  int l = 1;
};

ojson run_spectrum(const SpectrumParams& p) {
  symspin::FockModel model(p.l, p.cutoff);
  symspin::RicciData ric =
      p.geometry == "flat"
          ? symspin::RicciData::zero(p.l)
          : symspin::RicciData::isotropic(p.l, 1.0 / p.radius);
  auto cands = symspin::candidate_spectrum(ric, model, p.count);
  ojson rep;
  rep["command"] = "spectrum";
  rep["params"] = {{"case", p.geometry},
                   {"radius", p.radius},
                   {"count", p.count},
                   {"cutoff", p.cutoff},
                   {"l", p.l}};
  ojson arr = ojson::array();
  for (const auto& c : cands) arr.push_back(candidate_json(c));
  rep["results"] = arr;
  rep["verdict"] = true;
  return rep;
}

std::string spectrum_text(const ojson& rep) {
  std::ostringstream os;
  os << "candidate numbers  case=" << rep["params"]["case"].get<std::string>()
     << " radius=" << rep["params"]["radius"]
     << " count=" << rep["params"]["count"] << "\n";
  for (const auto& c : rep["results"]) {
    const Complex z(c["lambda"][0].get<double>(),
                    c["lambda"][1].get<double>());
    os << "  level " << c["hermite_level"] << "  lambda = " << fmt_complex(z)
       << "  (" << c["descriptor"].get<std::string>() << ")\n";
  }
  os << "verdict: pass\n";
  return os.str();
}

std::string spectrum_csv(const ojson& rep) {
  std::ostringstream os;
  os << "index,lambda_re,lambda_im,hermite_level,descriptor\n"
     << std::setprecision(17);
  int idx = 0;
  for (const auto& c : rep["results"])
    os << idx++ << "," << c["lambda"][0].get<double>() << ","
       << c["lambda"][1].get<double>() << "," << c["hermite_level"] << ","
       << c["descriptor"].get<std::string>() << "\n";
  return os.str();
}

// --- killing-flat ----------------------------------------------------------

struct FlatParams {
  int l = 1;
  int cutoff = 6;
  int grid = 17;
  double extent = 1.0;
};

ojson run_killing_flat(const FlatParams& p, const symspin::Tolerances& tol) {
  symspin::ChartModel chart = symspin::flat_chart(p.l, p.grid, p.extent);
  symspin::FockModel model(p.l, p.cutoff);
  symspin::RigidityResult res = symspin::flat_rigidity(chart, model, tol);
  ojson rep;
  rep["command"] = "killing-flat";
  rep["params"] = {{"l", p.l},
                   {"cutoff", p.cutoff},
                   {"grid", p.grid},
                   {"extent", p.extent}};
  ojson cands = ojson::array();
  for (const auto& c : res.candidates) cands.push_back(candidate_json(c));
  rep["results"] = {{"kernel_dimension", res.kernel_dimension},
                    {"expected_dimension", res.expected_dimension},
                    {"kernel_constancy", res.kernel_constancy},
                    {"smallest_nonzero", res.smallest_nonzero},
                    {"candidates", cands},
                    {"certificate", symspin::to_json(res.certificate)}};
  rep["verdict"] = res.certificate.verdict;
  return rep;
}

std::string killing_flat_text(const ojson& rep) {
  const auto& r = rep["results"];
  std::ostringstream os;
  os << "flat-chart kernel analysis  l=" << rep["params"]["l"]
     << " cutoff=" << rep["params"]["cutoff"]
     << " grid=" << rep["params"]["grid"] << "\n"
     << "  kernel dimension   " << r["kernel_dimension"] << " (expected "
     << r["expected_dimension"] << ")\n"
     << std::scientific << std::setprecision(3)
     << "  kernel constancy   " << r["kernel_constancy"].get<double>() << "\n"
     << "  smallest nonzero   " << r["smallest_nonzero"].get<double>() << "\n"
     << "  certificate        " << r["certificate"]["kind"].get<std::string>()
     << " (" << r["certificate"]["regression_id"].get<std::string>() << ")\n"
     << "verdict: " << fmt_pass(rep["verdict"].get<bool>()) << "\n";
  return os.str();
}

std::string key_value_csv(const ojson& rep) {
  std::ostringstream os;
  os << "key,value\n" << std::setprecision(17);
  const auto& r = rep["results"];
  for (auto it = r.begin(); it != r.end(); ++it) {
    if (it.value().is_structured()) continue;
    os << it.key() << "," << it.value().dump() << "\n";
  }
  os << "verdict," << (rep["verdict"].get<bool>() ? 1 : 0) << "\n";
  return os.str();
}

// --- killing-sphere --------------------------------------------------------

struct SphereParams {
  double radius = 1.0;
  int n_max = 3;
  int theta = 64;
  int modes = 8;
  int cutoff = 8;
  double pole_margin = 0.15;
};

ojson run_killing_sphere(const SphereParams& p,
                         const symspin::Tolerances& tol) {
  symspin::NonexistenceScan scan = symspin::sphere_nonexistence(
      p.radius, p.n_max, p.theta, p.modes, p.cutoff, p.pole_margin, tol);
  ojson rep;
  rep["command"] = "killing-sphere";
  rep["params"] = {{"radius", p.radius},       {"n_max", p.n_max},
                   {"theta_nodes", p.theta},   {"fourier_modes", p.modes},
                   {"cutoff", p.cutoff},       {"pole_margin", p.pole_margin}};
  ojson cands = ojson::array();
  for (const auto& cs : scan.candidates) {
    ojson c = candidate_json(cs.candidate);
    c["s_min_base"] = cs.s_min_base;
    c["s_min_refined"] = cs.s_min_refined;
    c["drift"] = cs.drift;
    ojson by_mode = ojson::object();
    for (const auto& [m, v] : cs.s_by_mode)
      by_mode[std::to_string(m)] = v;
    c["s_by_mode"] = by_mode;
    cands.push_back(c);
  }
  rep["results"] = {{"candidates", cands},
                    {"patch_gradient_floor", scan.patch_gradient_floor},
                    {"patch_ode_residual", scan.patch_ode_residual},
                    {"certificate", symspin::to_json(scan.certificate)}};
  rep["verdict"] = scan.certificate.verdict;
  return rep;
}

std::string killing_sphere_text(const ojson& rep) {
  const auto& r = rep["results"];
  std::ostringstream os;
  os << "sphere candidate sweep  radius=" << rep["params"]["radius"]
     << " n_max=" << rep["params"]["n_max"]
     << " theta_nodes=" << rep["params"]["theta_nodes"]
     << " fourier_modes=" << rep["params"]["fourier_modes"] << "\n"
     << std::scientific << std::setprecision(3);
  for (const auto& c : r["candidates"]) {
    const Complex z(c["lambda"][0].get<double>(),
                    c["lambda"][1].get<double>());
    os << "  level " << c["hermite_level"] << "  lambda = " << fmt_complex(z)
       << "  s_min " << c["s_min_base"].get<double>() << "  drift "
       << c["drift"].get<double>() << "\n";
  }
  os << "  patch gradient floor " << r["patch_gradient_floor"].get<double>()
     << "\n"
     << "  certificate " << r["certificate"]["kind"].get<std::string>()
     << "  bound " << r["certificate"]["bound"].get<double>() << "  ("
     << r["certificate"]["regression_id"].get<std::string>() << ")\n"
     << "verdict: " << fmt_pass(rep["verdict"].get<bool>()) << "\n";
  return os.str();
}

std::string killing_sphere_csv(const ojson& rep) {
  std::ostringstream os;
  os << "lambda_re,lambda_im,hermite_level,s_min_base,s_min_refined,drift\n"
     << std::setprecision(17);
  for (const auto& c : rep["results"]["candidates"])
    os << c["lambda"][0].get<double>() << "," << c["lambda"][1].get<double>()
       << "," << c["hermite_level"] << "," << c["s_min_base"].get<double>()
       << "," << c["s_min_refined"].get<double>() << ","
       << c["drift"].get<double>() << "\n";
  return os.str();
}

// --- report ----------------------------------------------------------------

ojson run_report(int l, int cutoff, const symspin::Tolerances& tol) {
  ojson rep;
  rep["command"] = "report";
  rep["params"] = {{"l", l}, {"cutoff", cutoff}};

  VerifyParams vp;
  vp.l = l;
  vp.cutoff = cutoff;
  ojson verify = run_verify(vp, tol);

  SpectrumParams sp;
  ojson spectrum = run_spectrum(sp);

  FlatParams fp;
  fp.l = 1;
  fp.cutoff = 4;
  fp.grid = 9;
  ojson flat = run_killing_flat(fp, tol);

  SphereParams hp;
  hp.n_max = 1;
  hp.theta = 32;
  ojson sphere = run_killing_sphere(hp, tol);

  auto section = [](const ojson& sub) {
    return ojson{{"params", sub["params"]},
                 {"results", sub["results"]},
                 {"verdict", sub["verdict"]}};
  };
  rep["results"] = {{"verify", section(verify)},
                    {"spectrum", section(spectrum)},
                    {"killing_flat", section(flat)},
                    {"killing_sphere", section(sphere)}};
  rep["verdict"] = verify["verdict"].get<bool>() &&
                   spectrum["verdict"].get<bool>() &&
                   flat["verdict"].get<bool>() &&
                   sphere["verdict"].get<bool>();
  return rep;
}

std::string report_text(const ojson& rep) {
  std::ostringstream os;
  os << "combined report\n";
  for (auto it = rep["results"].begin(); it != rep["results"].end(); ++it)
    os << "  " << std::left << std::setw(16) << it.key() << std::right << " "
       << fmt_pass(it.value()["verdict"].get<bool>()) << "\n";
  os << "verdict: " << fmt_pass(rep["verdict"].get<bool>()) << "\n";
  return os.str();
}

std::string report_csv(const ojson& rep) {
  std::ostringstream os;
  os << "section,verdict\n";
  for (auto it = rep["results"].begin(); it != rep["results"].end(); ++it)
    os << it.key() << "," << (it.value()["verdict"].get<bool>() ? 1 : 0)
       << "\n";
  os << "overall," << (rep["verdict"].get<bool>() ? 1 : 0) << "\n";
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Truncated symplectic spinor calculus: operator identities, candidate "
      "Killing numbers, and case-study certificates."};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config");

  OutputOptions out;
  app.add_option("--format", out.format, "Output format")
      ->check(CLI::IsMember({"json", "text", "csv"}))
      ->capture_default_str();
  app.add_option("--out", out.out_path, "Write the report to a file");
  std::string profile = "env";
  app.add_option("--profile", profile,
                 "Tolerance profile (env reads SYMSPIN_TOL_PROFILE)")
      ->check(CLI::IsMember({"env", "default", "strict"}))
      ->capture_default_str();

  VerifyParams vp;
  CLI::App* verify = app.add_subcommand(
      "verify", "Run the operator identity suite on one model");
  verify->add_option("--l", vp.l, "Number of oscillator modes")
      ->capture_default_str();
  verify->add_option("--cutoff", vp.cutoff, "Basis truncation level")
      ->capture_default_str();
  verify->add_option("--seed", vp.seed, "Sample seed")->capture_default_str();
  verify->add_option("--trials", vp.trials, "Random trials per identity")
      ->capture_default_str();

  SpectrumParams sp;
  CLI::App* spectrum = app.add_subcommand(
      "spectrum", "Enumerate candidate Killing numbers for a case study");
  spectrum->add_option("--case", sp.geometry, "Case study geometry")
      ->check(CLI::IsMember({"sphere", "flat"}))
      ->capture_default_str();
  spectrum->add_option("--radius", sp.radius, "Sphere radius")
      ->capture_default_str();
  spectrum->add_option("--count", sp.count, "Number of oscillator levels")
      ->capture_default_str();
  spectrum->add_option("--cutoff", sp.cutoff, "Basis truncation level")
      ->capture_default_str();
  spectrum->add_option("--l", sp.l, "Number of oscillator modes")
      ->capture_default_str();

  FlatParams fp;
  CLI::App* kflat = app.add_subcommand(
      "killing-flat", "Kernel analysis of the flat-chart equation");
  kflat->add_option("--l", fp.l, "Number of oscillator modes")
      ->capture_default_str();
  kflat->add_option("--cutoff", fp.cutoff, "Basis truncation level")
      ->capture_default_str();
  kflat->add_option("--grid", fp.grid, "Nodes per chart axis")
      ->capture_default_str();
  kflat->add_option("--extent", fp.extent, "Chart edge length")
      ->capture_default_str();

  SphereParams hp;
  CLI::App* ksphere = app.add_subcommand(
      "killing-sphere", "Candidate sweep over the sphere chart");
  ksphere->add_option("--radius", hp.radius, "Sphere radius")
      ->capture_default_str();
  ksphere->add_option("--n-max", hp.n_max, "Highest oscillator level")
      ->capture_default_str();
  ksphere->add_option("--theta", hp.theta, "Polar nodes")
      ->capture_default_str();
  ksphere->add_option("--modes", hp.modes, "Azimuthal Fourier mode count")
      ->capture_default_str();
  ksphere->add_option("--cutoff", hp.cutoff, "Basis truncation level")
      ->capture_default_str();
  ksphere->add_option("--pole-margin", hp.pole_margin,
                      "Polar exclusion angle")
      ->capture_default_str();

  int rl = 1, rcutoff = 8;
  CLI::App* report = app.add_subcommand(
      "report", "Aggregate suite, spectrum and both case studies");
  report->add_option("--l", rl, "Number of oscillator modes")
      ->capture_default_str();
  report->add_option("--cutoff", rcutoff, "Basis truncation level")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const symspin::Tolerances tol =
        profile == "env"
            ? symspin::Tolerances::from_env()
            : (profile == "strict" ? symspin::Tolerances::strict()
                                   : symspin::Tolerances::defaults());
    ojson rep;
    std::string text, csv;
    if (verify->parsed()) {
      rep = run_verify(vp, tol);
      text = verify_text(rep);
      csv = verify_csv(rep);
    } else if (spectrum->parsed()) {
      rep = run_spectrum(sp);
      text = spectrum_text(rep);
      csv = spectrum_csv(rep);
    } else if (kflat->parsed()) {
      rep = run_killing_flat(fp, tol);
      text = killing_flat_text(rep);
      csv = key_value_csv(rep);
    } else if (ksphere->parsed()) {
      rep = run_killing_sphere(hp, tol);
      text = killing_sphere_text(rep);
      csv = killing_sphere_csv(rep);
    } else {
      rep = run_report(rl, rcutoff, tol);
      text = report_text(rep);
      csv = report_csv(rep);
    }
    const bool verdict = rep["verdict"].get<bool>();
    emit(out, std::move(rep), text, csv);
    return verdict ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
