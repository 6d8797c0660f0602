// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <risfa/channel.hpp>
#include <risfa/matrix.hpp>
#include <risfa/rng.hpp>

namespace risfa::test {

struct Scenario {
  SystemConfig cfg;
  ChannelSet channels;
  Schedule schedule;
  SymbolMatrix symbols;
};

inline Scenario make_scenario(SystemConfig cfg, std::uint64_t seed) {
  Rng rng(seed);
  Scenario s{cfg, gen_channels(cfg, rng), gen_schedule(cfg, rng), gen_symbols(cfg, rng)};
  return s;
}

// Rows of H belonging to ports that no block ever activates are invisible to
// a receiver; exact per-factor recovery additionally needs each port selected
// often enough that the rank-K incident subspaces span all Nr dimensions.
inline bool port_coverage_at_least(const Schedule& sch, int multiplicity) {
  Eigen::VectorXd hits = Eigen::VectorXd::Zero(sch.selections.front().cols());
  for (const auto& s : sch.selections)
    for (Eigen::Index i = 0; i < s.rows(); ++i)
      for (Eigen::Index j = 0; j < s.cols(); ++j)
        if (s(i, j) == cxd(1, 0)) hits(j) += 1.0;
  return hits.minCoeff() >= static_cast<double>(multiplicity);
}

// First seed >= start whose schedule covers every port at least
// ceil(Nr/K) times, so that the channels are exactly recoverable.
inline Scenario recoverable_scenario(const SystemConfig& cfg, std::uint64_t start_seed) {
  const int needed = (cfg.ris_elements + cfg.users - 1) / cfg.users;
  for (std::uint64_t seed = start_seed;; ++seed) {
    auto s = make_scenario(cfg, seed);
    if (port_coverage_at_least(s.schedule, needed)) return s;
  }
}

inline SystemConfig small_cfg(Protocol protocol) {
  SystemConfig cfg;
  cfg.active_antennas = 2;
  cfg.total_ports = 3;
  cfg.ris_elements = 2;
  cfg.users = 2;
  cfg.blocks = protocol == Protocol::P1 ? 2 : 3;
  cfg.slots = 2;
  cfg.symbols_per_block = 3;
  cfg.protocol = protocol;
  return cfg;
}

inline CMatrix random_cmatrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  CMatrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.cgaussian();
  return m;
}

// Small random dimension in [1, hi] for property tests.
inline Eigen::Index random_dim(Rng& rng, int hi = 5) {
  return static_cast<Eigen::Index>(1 + rng.bounded(static_cast<std::uint64_t>(hi)));
}

inline double max_abs_diff(const CMatrix& a, const CMatrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace risfa::test
