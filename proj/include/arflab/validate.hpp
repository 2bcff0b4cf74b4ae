#pragma once

// Evaluates every lemma/theorem hypothesis on a parameter set and reports
// the computed sides.  Simulation-scale runs deliberately violate several
// hypotheses (compliant exponents put block boundaries beyond any feasible
// grid); this report makes each violation explicit.

#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "arflab/params.hpp"

namespace arflab {

struct ConstraintCheck {
  std::string name;
  std::string source;   // lemma / theorem the hypothesis comes from
  double lhs = 0.0;
  std::string relation; // ">", "<", ">="
  double rhs = 0.0;
  bool pass = false;
  bool informational = false;
  std::string note;
};

struct ParameterReport {
  Parameters params;
  std::vector<ConstraintCheck> checks;
  std::map<std::string, double> derived;

  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.informational && !c.pass) return false;
    return true;
  }
};

inline ParameterReport validate_parameters(const Parameters& p) {
  p.check();
  ParameterReport rep;
  rep.params = p;
  const double a = static_cast<double>(p.alpha);
  const double b = static_cast<double>(p.beta);
  const double d = static_cast<double>(p.d);
  const double rho = p.rho();

  rep.derived["rho"] = rho;
  rep.derived["r0"] = p.r0();
  rep.derived["s"] = p.s_exponent();
  rep.derived["eps0"] = p.eps0();
  rep.derived["alpha0"] = p.alpha0();
  rep.derived["delta0"] = p.delta0();
  rep.derived["nu0"] = p.nu0();

  auto add = [&](std::string name, std::string source, double lhs, std::string relation,
                 double rhs, bool informational = false, std::string note = "") {
    bool pass = relation == ">"    ? lhs > rhs
                : relation == "<"  ? lhs < rhs
                : relation == ">=" ? lhs >= rhs
                                   : false;
    rep.checks.push_back({std::move(name), std::move(source), lhs, std::move(relation), rhs,
                          pass, informational, std::move(note)});
  };

  add("beta_smoothing", "lemma 3.6", b, ">", (1.0 + 2.0 / p.r) * (3.0 + 4.0 / p.r));
  add("nu_lower", "lemma 3.7", p.nu, ">", d);
  add("nu_upper", "lemma 3.7", p.nu, "<", 2.0 * d);
  add("beta_gap_rate", "lemma 3.8", b, ">", 3.0 / p.delta0(), false,
      "delta0 = nu/d - 1");
  add("alpha_minus_beta", "lemma 3.9", a - b, ">", 2.0 + 4.0 / rho);
  add("alpha_counting", "theorem 4.4", a, ">", 3.0 * (1.0 + 1.0 / rho) * (1.0 - 1.0 / d));
  add("beta_counting", "theorem 4.4", b, ">", (2.0 / rho) * (1.0 + 1.0 / rho) * (1.0 - 1.0 / d));
  add("ratio_lower", "lemma 3.2 / theorem 4.4", a / b, ">", 2.0 * p.r0() * p.r / (2.0 + p.r));
  add("ratio_upper", "lemma 3.2 / theorem 4.4", a / b, "<", 2.0 * (1.0 + p.r) / (2.0 + p.r));
  add("alpha_strips", "lemma 5.2", a, ">", 16.0 / (3.0 * p.tau) - 1.0);
  add("alpha_corners", "lemma 5.3", a, ">", std::numeric_limits<double>::quiet_NaN(), true,
      "depends on the unspecified gamma of lemma 5.1(b)");

  // The moment bound asks for (C2') with nu >= d*nu0; exponential decay
  // of u(n) implies every power rate, so a positive lambda subsumes it.
  {
    ConstraintCheck c;
    c.name = "nu_moment_bound";
    c.source = "lemma 3.4";
    c.lhs = p.nu;
    c.relation = ">=";
    c.rhs = d * p.nu0();
    c.pass = (p.lambda > 0.0) || (p.nu >= c.rhs);
    if (p.lambda > 0.0 && p.nu < c.rhs)
      c.note = "satisfied via exponential decay (C2), which implies (C2') for every nu";
    rep.checks.push_back(c);
  }
  if (p.d >= 3)
    add("nu0_dimension", "lemma 3.4", p.nu0(), "<", 1.0 / (d - 2.0));

  return rep;
}

}  // namespace arflab
