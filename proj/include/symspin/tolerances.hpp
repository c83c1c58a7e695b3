#pragma once

#include <cstdlib>
#include <string>

namespace symspin {

// Central tolerance set. All numeric assertions in the library and the
// verification suite draw from one instance of this struct so that bounds
// stay consistent between tests, the CLI and stored certificates.
struct Tolerances {
  double clifford = 1e-12;        // exact algebraic identities (commutators)
  double h_relation = 1e-11;      // anticommutator ladder identity per degree
  double projection = 1e-10;      // projector algebra (idempotency, kernels)
  double algebraic = 1e-10;       // generic closed-form algebra checks
  double spectrum = 1e-12;        // candidate eigenvalue relations
  double grid_factor = 5.0;       // C in C*h^2 bounds for finite differences
  double stability = 0.20;        // allowed relative drift under refinement
  double nonexistence_floor = 1e-3;  // singular-value floor for verdicts
  double rank = 1e-8;             // relative cutoff for numerical rank

  static Tolerances defaults() { return {}; }

  static Tolerances strict() {
    Tolerances t;
    t.clifford = 1e-13;
    t.h_relation = 1e-12;
    t.projection = 1e-11;
    t.algebraic = 1e-11;
    t.spectrum = 1e-13;
    t.grid_factor = 4.0;
    t.stability = 0.15;
    return t;
  }

  // Profile selected through SYMSPIN_TOL_PROFILE ("strict" or "default").
  static Tolerances from_env() {
    const char* p = std::getenv("SYMSPIN_TOL_PROFILE");
    if (p != nullptr && std::string(p) == "strict") return strict();
    return defaults();
  }
};

}  // namespace symspin
