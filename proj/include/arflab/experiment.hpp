#pragma once

// Replicated coupling experiments: shared CDF bank, independent
// replicates (field -> block stats -> coupled sheet -> profile), and the
// per-scale statistics consumed by the scaling suite.

#include <span>
#include <stdexcept>
#include <vector>

#include "arflab/checks.hpp"
#include "arflab/coupling.hpp"

namespace arflab {

struct CouplingReplicateResult {
  std::uint64_t replicate = 0;
  std::vector<BlockStat> stats;               // by block_order
  std::vector<ScaleStatistics> scale_stats;   // by scale
  CouplingProfile profile;
};

struct CouplingExperiment {
  std::vector<MultiIndex> block_order;  // good blocks <= kmax, lex
  std::vector<MultiIndex> psi_order;    // same blocks in psi order
  std::vector<MultiIndex> probes;
  double sigma = 1.0;
  std::vector<CouplingReplicateResult> replicates;
};

struct CouplingSettings {
  MultiIndex extent;
  std::vector<MultiIndex> scales;
  int replicates = 50;
  std::size_t cdf_ensemble = 2000;
  double epsilon = 0.05;
  bool identity_coupling = false;
  std::uint64_t master_seed = 1;
  unsigned threads = 0;
};

inline CouplingExperiment run_coupling_experiment(const FieldModel& model,
                                                  const CovarianceModel& cov,
                                                  const BlockGeometry& geometry,
                                                  const CouplingSettings& cfg) {
  if (cfg.scales.empty())
    throw std::invalid_argument("coupling experiment: at least one scale required");
  const std::size_t d = cfg.extent.dim();
  MultiIndex kmax(d, 1);
  for (const auto& k : cfg.scales)
    for (std::size_t s = 0; s < d; ++s) kmax[s] = std::max(kmax[s], k[s]);
  for (std::size_t s = 0; s < d; ++s) {
    if (geometry.n(kmax[s] + 1) > cfg.extent[s])
      throw std::invalid_argument(
          "coupling experiment: extent must reach the next boundary past every scale");
  }
  if (cfg.identity_coupling &&
      (model.is_moving_average() || model.law() != Innovation::Gaussian))
    throw std::invalid_argument("identity coupling requires an iid Gaussian field");

  CouplingExperiment exp;
  exp.block_order = geometry.good_block_set(kmax);
  exp.psi_order = geometry.psi_order_within(kmax);
  if (exp.psi_order.size() != exp.block_order.size())
    throw std::logic_error("psi order does not cover the good set");
  exp.sigma = std::sqrt(cov.sigma2());
  exp.probes = probe_points(geometry, cfg.extent, geometry.params().tau);

  const CdfBank bank = build_cdf_bank(model, geometry, cov, exp.block_order,
                                      model.gaussian() ? 2 : cfg.cdf_ensemble,
                                      cfg.master_seed, cfg.threads);
  std::vector<CoreRectangle> cores;
  cores.reserve(cfg.scales.size());
  for (const auto& k : cfg.scales) cores.push_back(geometry.core_rectangle(k));

  exp.replicates.resize(static_cast<std::size_t>(cfg.replicates));
  parallel_for(
      exp.replicates.size(),
      [&](std::size_t r) {
        CouplingReplicateResult out;
        out.replicate = r;
        auto sample = simulate_field(model, cfg.extent, cfg.master_seed, r);
        out.stats = compute_block_stats(sample, geometry, cov, bank, exp.block_order,
                                        cfg.master_seed, r);
        WienerSheet sheet =
            cfg.identity_coupling
                ? identity_sheet(sample, cov.sigma2())
                : build_coupled_sheet(out.stats, exp.block_order, exp.psi_order, geometry,
                                      exp.sigma, cfg.extent, cfg.master_seed, r);
        out.profile = coupling_error_profile(sample, sheet, geometry, cfg.scales,
                                             geometry.params().tau, cfg.epsilon, exp.probes);
        for (std::size_t sc = 0; sc < cores.size(); ++sc)
          out.scale_stats.push_back(compute_scale_statistics(out.stats, exp.block_order,
                                                             cores[sc], geometry, exp.sigma,
                                                             sample, out.profile.remainders[sc]));
        exp.replicates[r] = std::move(out);
      },
      cfg.threads);
  return exp;
}

/// [replicate][scale] view for the scaling suite.
inline std::vector<std::vector<ScaleStatistics>> scale_table(const CouplingExperiment& exp) {
  std::vector<std::vector<ScaleStatistics>> table;
  table.reserve(exp.replicates.size());
  for (const auto& rep : exp.replicates) table.push_back(rep.scale_stats);
  return table;
}

}  // namespace arflab
