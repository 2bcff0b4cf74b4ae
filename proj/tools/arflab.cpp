// arflab: simulation-and-verification laboratory for blocked strong
// approximation of associated random fields.
//
// Subcommands: validate-params, geometry, covariance, simulate, couple,
// verify, report.  Exit codes: 0 = success / all checks passed,
// 1 = at least one check failed, 2 = configuration or I/O error.

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "arflab/checks.hpp"
#include "arflab/config.hpp"
#include "arflab/experiment.hpp"
#include "arflab/io.hpp"
#include "arflab/validate.hpp"

namespace fs = std::filesystem;
using namespace arflab;
using nlohmann::json;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string output_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

LabConfig resolve_config(const CommonOpts& opts) {
  LabConfig cfg = opts.config_path.empty() ? LabConfig{} : load_config(opts.config_path);
  if (opts.seed_set) cfg.master_seed = opts.seed;
  if (!opts.output_dir.empty()) cfg.output_dir = opts.output_dir;
  if (const char* env = std::getenv("ARFLAB_OUTPUT_DIR")) cfg.output_dir = env;
  fs::create_directories(cfg.output_dir);
  return cfg;
}

std::string fmt_index(const MultiIndex& k) {
  std::string s;
  for (std::size_t i = 0; i < k.dim(); ++i) s += (i ? " " : "") + std::to_string(k[i]);
  return s;
}

int cmd_validate_params(const CommonOpts& opts) {
  LabConfig cfg = resolve_config(opts);
  Parameters p = cfg.geometry;
  p.d = cfg.dimension;
  auto rep = validate_parameters(p);
  const json cj = to_json(cfg);
  json checks = json::array();
  for (const auto& c : rep.checks) {
    checks.push_back({{"name", c.name},
                      {"source", c.source},
                      {"lhs", c.lhs},
                      {"relation", c.relation},
                      {"rhs", c.rhs},
                      {"pass", c.pass},
                      {"informational", c.informational},
                      {"note", c.note}});
    std::cout << (c.informational ? "info " : (c.pass ? "pass " : "FAIL ")) << c.name << " ["
              << c.source << "]: " << c.lhs << " " << c.relation << " " << c.rhs;
    if (!c.note.empty()) std::cout << "  (" << c.note << ")";
    std::cout << "\n";
  }
  write_json_artifact(fs::path(cfg.output_dir) / "validate_params.json", cj, cfg.master_seed,
                      json{{"checks", checks}, {"derived", rep.derived},
                           {"all_pass", rep.all_pass()}});
  return rep.all_pass() ? 0 : 1;
}

int cmd_geometry(const CommonOpts& opts, Index l_max, std::size_t psi_count) {
  LabConfig cfg = resolve_config(opts);
  const json cj = to_json(cfg);
  BlockGeometry geom = make_geometry(cfg);
  const fs::path dir(cfg.output_dir);

  {
    CsvWriter csv(dir / "boundary.csv", cj, cfg.master_seed, {"l", "n_l"});
    for (Index l = 0; l <= std::min(l_max, geom.l_cap()); ++l)
      csv.row({std::to_string(l), std::to_string(geom.n(l))});
  }
  const MultiIndex kmax(cfg.experiment.kmax);
  {
    CsvWriter csv(dir / "blocks.csv", cj, cfg.master_seed,
                  {"k", "B_lo", "B_hi", "H_hi", "vol_B", "vol_H", "vol_I", "good"});
    for_each_point(Rect(MultiIndex(kmax.dim(), 0), kmax), [&](const MultiIndex& k) {
      auto dec = geom.decompose_block(k);
      csv.row({fmt_index(k), fmt_index(dec.block.lo), fmt_index(dec.block.hi),
               fmt_index(dec.big.hi), std::to_string(dec.block.volume()),
               std::to_string(dec.big.volume()),
               std::to_string(dec.block.volume() - dec.big.volume()),
               geom.is_good(k) ? "1" : "0"});
    });
  }
  {
    CsvWriter csv(dir / "good_set.csv", cj, cfg.master_seed, {"i"});
    for (const auto& k : geom.good_block_set(kmax)) csv.row({fmt_index(k)});
  }
  {
    Index m_max = 3;
    for (std::size_t s = 0; s < kmax.dim(); ++s) m_max = std::max(m_max, kmax[s]);
    auto psi = geom.enumerate_psi(m_max, psi_count);
    CsvWriter csv(dir / "psi.csv", cj, cfg.master_seed, {"m", "phi_position", "psi_m"});
    for (std::size_t i = 0; i < psi.order.size(); ++i)
      csv.row({std::to_string(i + 1), std::to_string(psi.phi_position[i]),
               fmt_index(psi.order[i])});
  }
  {
    CsvWriter csv(dir / "core.csv", cj, cfg.master_seed,
                  {"k", "M_k", "N_k", "L_k_size", "violations"});
    for_each_point(Rect(MultiIndex(kmax.dim(), 0), kmax), [&](const MultiIndex& k) {
      if (!geom.is_good(k)) return;
      auto core = geom.core_rectangle(k);
      csv.row({fmt_index(k), fmt_index(core.m_corner), fmt_index(geom.corner(k)),
               std::to_string(core.l_k.size()), std::to_string(core.violations.size())});
    });
  }
  Parameters p = cfg.geometry;
  p.d = cfg.dimension;
  auto rep = validate_parameters(p);
  json checks = json::array();
  for (const auto& c : rep.checks)
    checks.push_back({{"name", c.name}, {"pass", c.pass}, {"informational", c.informational}});
  write_json_artifact(dir / "geometry_summary.json", cj, cfg.master_seed,
                      json{{"kmax", cfg.experiment.kmax}, {"validator", checks}});
  std::cout << "geometry tables written to " << dir.string() << "\n";
  return 0;
}

int cmd_covariance(const CommonOpts& opts) {
  LabConfig cfg = resolve_config(opts);
  const json cj = to_json(cfg);
  const fs::path dir(cfg.output_dir);
  CovarianceModel cov = make_covariance_model(cfg);
  BlockGeometry geom = make_geometry(cfg);

  {
    CsvWriter csv(dir / "u_coefficient.csv", cj, cfg.master_seed, {"n", "u_n"});
    for (Index n = 0; n <= cfg.experiment.u_max; ++n)
      csv.row({std::to_string(n), format_double(cov.u(n))});
  }
  {
    CsvWriter csv(dir / "sigma2_v.csv", cj, cfg.master_seed,
                  {"side", "vol_V", "sigma2_V", "sigma2_V_over_vol"});
    for (Index side : cfg.experiment.gap_sides) {
      Rect v(MultiIndex(static_cast<std::size_t>(cfg.dimension), 0),
             MultiIndex(static_cast<std::size_t>(cfg.dimension), side));
      const double s2 = cov.exact_sigma2(v);
      csv.row({std::to_string(side), std::to_string(v.volume()), format_double(s2),
               format_double(s2 / static_cast<double>(v.volume()))});
    }
  }
  {
    auto fit = susceptibility_gap_fit(cov, cfg.experiment.gap_sides);
    CsvWriter csv(dir / "gap_fit.csv", cj, cfg.master_seed, {"side", "vol_V", "gap"});
    for (std::size_t i = 0; i < fit.sides.size(); ++i)
      csv.row({std::to_string(fit.sides[i]), format_double(fit.volumes[i]),
               format_double(fit.gaps[i])});
    write_json_artifact(dir / "gap_fit.json", cj, cfg.master_seed,
                        json{{"fitted_slope", fit.fitted_slope}, {"target", fit.target}});
  }
  {
    const MultiIndex kmax(cfg.experiment.kmax);
    CsvWriter csv(dir / "block_covariance.csv", cj, cfg.master_seed,
                  {"i", "j", "exact", "bound_exponent"});
    auto good = geom.good_block_set(kmax);
    for (const auto& i : good)
      for (const auto& j : good) {
        if (i == j) continue;
        auto bc = block_sum_covariance(cov, geom, i, j);
        csv.row({fmt_index(i), fmt_index(j), format_double(bc.exact),
                 format_double(bc.bound_exponent)});
      }
  }
  std::cout << "sigma2 = " << format_double(cov.sigma2()) << "\n";
  return 0;
}

int cmd_simulate(const CommonOpts& opts, const std::string& dump_path, int replicates) {
  LabConfig cfg = resolve_config(opts);
  const json cj = to_json(cfg);
  const fs::path dir(cfg.output_dir);
  FieldModel model = make_field_model(cfg);
  const MultiIndex extent(cfg.experiment.extent);

  CsvWriter csv(dir / "simulate_summary.csv", cj, cfg.master_seed,
                {"replicate", "cells", "mean", "variance", "S_N"});
  for (int r = 0; r < replicates; ++r) {
    auto sample = simulate_field(model, extent, cfg.master_seed,
                                 static_cast<std::uint64_t>(r));
    const double n = static_cast<double>(sample.cells.size());
    double mean = 0.0;
    for (double c : sample.cells) mean += c;
    mean /= n;
    double var = 0.0;
    for (double c : sample.cells) var += (c - mean) * (c - mean);
    var /= n;
    csv.row({std::to_string(r), std::to_string(sample.cells.size()), format_double(mean),
             format_double(var), format_double(sample.prefix(extent))});
    if (r == 0 && !dump_path.empty())
      write_grid_binary(dump_path, extent.coords(), sample.cells);
  }
  std::cout << "simulated " << replicates << " replicate(s) at extent " << fmt_index(extent)
            << "\n";
  return 0;
}

json check_to_json(const CheckResult& c) {
  json sweep = json::array();
  for (const auto& [scale, stat] : c.sweep) sweep.push_back({{"scale", scale}, {"stat", stat}});
  return json{{"name", c.name},
              {"lemma", c.lemma},
              {"verdict", c.verdict == Verdict::Pass   ? "pass"
                          : c.verdict == Verdict::Fail ? "fail"
                                                       : "informational"},
              {"sweep", sweep},
              {"details", c.details},
              {"note", c.note}};
}

CouplingSettings settings_from(const LabConfig& cfg) {
  CouplingSettings settings;
  settings.extent = MultiIndex(cfg.experiment.extent);
  for (const auto& k : cfg.experiment.scales) settings.scales.emplace_back(k);
  settings.replicates = cfg.experiment.replicates;
  settings.cdf_ensemble = cfg.experiment.cdf_replicates;
  settings.epsilon = cfg.experiment.epsilon;
  settings.identity_coupling = cfg.experiment.identity_coupling;
  settings.master_seed = cfg.master_seed;
  settings.threads = cfg.threads;
  return settings;
}

int cmd_couple(const CommonOpts& opts) {
  LabConfig cfg = resolve_config(opts);
  const json cj = to_json(cfg);
  const fs::path dir(cfg.output_dir);
  FieldModel model = make_field_model(cfg);
  CovarianceModel cov = make_covariance_model(cfg);
  BlockGeometry geom = make_geometry(cfg);

  auto exp = run_coupling_experiment(model, cov, geom, settings_from(cfg));

  {
    CsvWriter csv(dir / "block_stats.csv", cj, cfg.master_seed,
                  {"replicate", "i", "u_i", "v_i", "lambda_i^2", "tau_i^2", "w_i", "xi_i",
                   "eta_i", "e_i"});
    for (const auto& rep : exp.replicates)
      for (std::size_t b = 0; b < rep.stats.size(); ++b) {
        const auto& st = rep.stats[b];
        csv.row({std::to_string(rep.replicate), fmt_index(st.index), format_double(st.u),
                 format_double(st.v), format_double(st.lambda2), format_double(st.tau2),
                 format_double(st.w), format_double(st.xi), format_double(st.eta),
                 format_double(st.e)});
      }
  }
  double worst_identity = 0.0;
  {
    CsvWriter csv(dir / "decomposition.csv", cj, cfg.master_seed,
                  {"replicate", "k", "T1", "T2", "T3", "T4", "T5", "S_Rk", "residual"});
    for (const auto& rep : exp.replicates)
      for (const auto& sc : rep.scale_stats) {
        const auto& t = sc.terms;
        const double rel = std::abs(t.identity_residual()) / t.identity_scale();
        worst_identity = std::max(worst_identity, rel);
        csv.row({std::to_string(rep.replicate), fmt_index(sc.k), format_double(t.t1),
                 format_double(t.t2), format_double(t.t3), format_double(t.t4),
                 format_double(t.t5), format_double(t.s_rk),
                 format_double(t.identity_residual())});
      }
  }
  {
    CsvWriter csv(dir / "profile.csv", cj, cfg.master_seed,
                  {"replicate", "N", "vol_N", "S_N", "W_N", "gap", "ratio"});
    for (const auto& rep : exp.replicates)
      for (const auto& pt : rep.profile.points)
        csv.row({std::to_string(rep.replicate), fmt_index(pt.n), std::to_string(pt.vol),
                 format_double(pt.s), format_double(pt.w), format_double(pt.gap),
                 format_double(pt.ratio)});
  }
  {
    CsvWriter csv(dir / "remainders.csv", cj, cfg.master_seed,
                  {"replicate", "k", "vol_Nk", "max_D_s", "max_D_hat_s", "max_M_J",
                   "max_M_hat_J"});
    for (const auto& rep : exp.replicates)
      for (const auto& sc : rep.scale_stats)
        csv.row({std::to_string(rep.replicate), fmt_index(sc.k), std::to_string(sc.n_vol),
                 format_double(sc.max_d), format_double(sc.max_d_hat),
                 format_double(sc.max_m), format_double(sc.max_m_hat)});
  }
  json checks = json::array();
  const bool all_pass = worst_identity <= 1e-8;
  if (cfg.experiment.scales.size() >= 3)
    for (const auto& c : term_bound_suite(scale_table(exp))) checks.push_back(check_to_json(c));
  write_json_artifact(dir / "couple_summary.json", cj, cfg.master_seed,
                      json{{"worst_identity_residual", worst_identity},
                           {"identity_tolerance", 1e-8},
                           {"block_count", exp.block_order.size()},
                           {"probe_count", exp.probes.size()},
                           {"sigma", exp.sigma},
                           {"scaling_suite", checks}});
  std::cout << "couple: " << exp.replicates.size() << " replicates, worst identity residual "
            << format_double(worst_identity) << "\n";
  return all_pass ? 0 : 1;
}

int cmd_verify(const CommonOpts& opts, const std::string& which) {
  LabConfig cfg = resolve_config(opts);
  const json cj = to_json(cfg);
  const fs::path dir(cfg.output_dir);
  FieldModel model = make_field_model(cfg);
  CovarianceModel cov = make_covariance_model(cfg);
  BlockGeometry geom = make_geometry(cfg);

  auto wanted = [&](const std::string& name) {
    if (which == "all") {
      for (const auto& c : cfg.experiment.checks)
        if (c == name) return true;
      return false;
    }
    return which == name;
  };

  std::vector<CheckResult> results;
  if (wanted("clt"))
    results.push_back(clt_rate_check(model, cov, cfg.experiment.check_sizes,
                                     cfg.experiment.check_replicates, cfg.master_seed,
                                     cfg.threads));
  if (wanted("moment"))
    results.push_back(moment_bound_check(model, cfg.geometry.r, cfg.experiment.check_sizes,
                                         cfg.experiment.check_replicates, cfg.master_seed,
                                         cfg.threads));
  if (wanted("maximal")) {
    const std::vector<double> grid{2.0, 3.0, 4.0};
    results.push_back(maximal_inequality_check(model, 4, 64, grid, cfg.geometry.r,
                                               cfg.experiment.check_replicates,
                                               cfg.master_seed, 10.0, cfg.threads));
  }
  if (wanted("lil"))
    results.push_back(lil_tracker(model, cov, geom, cfg.geometry.tau,
                                  MultiIndex(cfg.experiment.extent),
                                  std::min(cfg.experiment.replicates, 50), cfg.master_seed,
                                  cfg.threads));
  if (wanted("terms")) {
    auto exp = run_coupling_experiment(model, cov, geom, settings_from(cfg));
    for (auto& c : term_bound_suite(scale_table(exp))) results.push_back(std::move(c));
  }
  if (results.empty()) {
    std::cerr << "verify: no check named '" << which << "'\n";
    return 2;
  }

  json summary = json::object();
  bool any_fail = false;
  for (const auto& c : results) {
    CsvWriter csv(dir / ("check_" + c.name + ".csv"), cj, cfg.master_seed,
                  {"scale", "statistic"});
    for (const auto& [scale, stat] : c.sweep)
      csv.row({format_double(scale), format_double(stat)});
    summary[c.lemma + " / " + c.name] = check_to_json(c);
    any_fail = any_fail || c.verdict == Verdict::Fail;
    std::cout << (c.verdict == Verdict::Pass   ? "pass "
                  : c.verdict == Verdict::Fail ? "FAIL "
                                               : "info ")
              << c.name << " [" << c.lemma << "]\n";
  }
  write_json_artifact(dir / "verify_summary.json", cj, cfg.master_seed, summary);
  return any_fail ? 1 : 0;
}

int cmd_report(const CommonOpts& opts) {
  LabConfig cfg = resolve_config(opts);
  const fs::path dir(cfg.output_dir);
  json merged = json::object();
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".json" || entry.path().filename() == "report.json")
      continue;
    std::ifstream in(entry.path());
    try {
      merged[entry.path().filename().string()] = json::parse(in);
    } catch (const json::parse_error&) {
      std::cerr << "report: skipping unparseable " << entry.path() << "\n";
    }
  }
  write_json_artifact(dir / "report.json", to_json(cfg), cfg.master_seed, merged);
  std::cout << "merged " << merged.size() << " artifact(s) into report.json\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"blocked strong-approximation laboratory for associated random fields"};
  app.require_subcommand(1);

  CommonOpts opts;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config_path, "config file (JSON or dotted-key text)");
    sub->add_option("--out", opts.output_dir, "output directory");
    sub->add_option("--seed", opts.seed, "master seed")->each([&](const std::string&) {
      opts.seed_set = true;
    });
  };

  auto* validate = app.add_subcommand("validate-params", "evaluate every lemma hypothesis");
  add_common(validate);

  Index l_max = 20;
  std::size_t psi_count = 200;
  auto* geometry = app.add_subcommand("geometry", "dump blocking tables");
  add_common(geometry);
  geometry->add_option("--l-max", l_max, "boundary rows to emit");
  geometry->add_option("--psi-count", psi_count, "psi entries to emit");

  auto* covariance = app.add_subcommand("covariance", "exact covariance tables");
  add_common(covariance);

  std::string dump_path;
  int sim_replicates = 1;
  auto* simulate = app.add_subcommand("simulate", "generate field samples");
  add_common(simulate);
  simulate->add_option("--dump-grid", dump_path, "write replicate 0 as a flat binary grid");
  simulate->add_option("--replicates", sim_replicates, "number of replicates");

  auto* couple = app.add_subcommand("couple", "full coupling pipeline");
  add_common(couple);

  std::string which_check = "all";
  auto* verify = app.add_subcommand("verify", "statistical lemma checks");
  add_common(verify);
  verify->add_option("--check", which_check, "check name or 'all'");

  auto* report = app.add_subcommand("report", "merge JSON artifacts");
  add_common(report);

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) return cmd_validate_params(opts);
    if (geometry->parsed()) return cmd_geometry(opts, l_max, psi_count);
    if (covariance->parsed()) return cmd_covariance(opts);
    if (simulate->parsed()) return cmd_simulate(opts, dump_path, sim_replicates);
    if (couple->parsed()) return cmd_couple(opts);
    if (verify->parsed()) return cmd_verify(opts, which_check);
    if (report->parsed()) return cmd_report(opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
