// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <limits>
#include <vector>

#include <risfa/matrix.hpp>
#include <risfa/protocols.hpp>
#include <risfa/receivers.hpp>

namespace risfa {

/// Genie symbol estimator: LS against the ground-truth global sensing matrix.
/// Serves as the BER reference curve.
struct PerfectCsiResult {
  CMatrix symbols_est;  // K x T
  CMatrix btotal;       // ground-truth sensing matrix, kept for analysis
  Eigen::Index effective_rank = 0;
};

inline PerfectCsiResult perfect_csi_symbols(const ObservationTensor& y,
                                            const KnownSideInfo& side, const ChannelSet& truth,
                                            double pinv_rel_tol = kDefaultPinvRelTol) {
  PerfectCsiResult r;
  r.btotal = y.protocol == Protocol::P1
                 ? pf_build_btotal(side, truth.user_to_ris, truth.ris_to_bs)
                 : npf_build_btotal(side, truth.user_to_ris, truth.ris_to_bs);
  const LsqSolution sol = pinv_solve(r.btotal, stacked_slices(y.data), pinv_rel_tol);
  r.symbols_est = sol.value;
  r.effective_rank = sol.effective_rank;
  return r;
}

/// Supervised channel estimator: the same alternating LS channel updates as
/// the semi-blind receivers, with the symbol matrix clamped to its true
/// value. NMSE reference for the effective cascaded channel; no symbol
/// estimation involved.
struct PilotAssistedResult {
  CMatrix user_to_ris_est;  // Nr x K
  CMatrix ris_to_bs_est;    // N x Nr
  std::vector<double> residuals;
  int iterations = 0;
  bool converged = false;
  std::vector<EffectiveRankRecord> effective_ranks;

  bool any_rank_deficiency() const {
    for (const auto& r : effective_ranks)
      if (r.deficient()) return true;
    return false;
  }
};

inline PilotAssistedResult pilot_assisted_channels(const ObservationTensor& y,
                                                   const KnownSideInfo& side,
                                                   const CMatrix& symbols_true,
                                                   const TalsOptions& opt, Rng& rng) {
  const bool p1 = y.protocol == Protocol::P1;
  const auto blocks = static_cast<Eigen::Index>(side.selections.size());
  const auto n = side.selections.front().cols();
  const auto nr = side.theta.cols();

  const CVector y_g = p1 ? pf_observation_g(y.data) : npf_observation(y.data);
  const CVector y_h = p1 ? pf_observation_h(y.data, blocks) : y_g;
  const CMatrix y_stacked = stacked_slices(y.data);
  const double y_power = y_stacked.squaredNorm();
  if (y_power == 0.0) throw DegenerateInputError("pilot_assisted_channels: all-zero observation");

  PilotAssistedResult out;
  out.ris_to_bs_est.resize(n, nr);
  for (Eigen::Index j = 0; j < nr; ++j)
    for (Eigen::Index i = 0; i < n; ++i) out.ris_to_bs_est(i, j) = rng.cgaussian();

  double eps_prev = std::numeric_limits<double>::infinity();
  for (int iter = 1; iter <= opt.max_iters; ++iter) {
    {
      const CMatrix wg = p1 ? pf_build_wg(side, out.ris_to_bs_est, symbols_true)
                            : npf_build_wg(side, out.ris_to_bs_est, symbols_true);
      const LsqSolution g = pinv_solve(wg, y_g, opt.pinv_rel_tol);
      out.user_to_ris_est = unvec(g.value.col(0), nr, side.coding.cols());
      out.effective_ranks.push_back({iter, UpdateStage::G, g.effective_rank, wg.cols()});
    }
    {
      const CMatrix wh = p1 ? pf_build_wh(side, out.user_to_ris_est, symbols_true)
                            : npf_build_wh(side, out.user_to_ris_est, symbols_true);
      const LsqSolution h = pinv_solve(wh, y_h, opt.pinv_rel_tol);
      out.ris_to_bs_est = unvec(h.value.col(0), n, nr);
      out.effective_ranks.push_back({iter, UpdateStage::H, h.effective_rank, wh.cols()});
    }
    const CMatrix btotal = p1 ? pf_build_btotal(side, out.user_to_ris_est, out.ris_to_bs_est)
                              : npf_build_btotal(side, out.user_to_ris_est, out.ris_to_bs_est);
    const double eps = (y_stacked - btotal * symbols_true).squaredNorm() / y_power;
    out.residuals.push_back(eps);
    out.iterations = iter;
    if (!std::isfinite(eps)) throw NumericError("pilot_assisted_channels: non-finite fit", iter);
    if (std::abs(eps - eps_prev) < opt.delta) {
      out.converged = true;
      break;
    }
    eps_prev = eps;
  }
  return out;
}

}  // namespace risfa
