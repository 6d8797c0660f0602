// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <risfa/channel.hpp>
#include <risfa/matrix.hpp>
#include <risfa/protocols.hpp>
#include <risfa/rng.hpp>

namespace risfa {

class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, int iteration)
      : std::runtime_error(what + " (iteration " + std::to_string(iteration) + ")"),
        iteration(iteration) {}
  int iteration;
};

// Selections, RIS phases, and coding are side information at the base
// station; both receivers take them as known inputs.
using KnownSideInfo = Schedule;

struct TalsOptions {
  double delta = 1e-8;   // stop when |eps(j) - eps(j-1)| < delta
  int max_iters = 300;
  double pinv_rel_tol = kDefaultPinvRelTol;
  // Random CN(0,1) initialization unless explicit starting points are given.
  std::optional<CMatrix> init_ris_to_bs;  // N x Nr
  std::optional<CMatrix> init_symbols;    // K x T
};

enum class UpdateStage { G, H, X };

inline const char* to_string(UpdateStage s) {
  switch (s) {
    case UpdateStage::G: return "G";
    case UpdateStage::H: return "H";
    case UpdateStage::X: return "X";
  }
  return "?";
}

struct EffectiveRankRecord {
  int iteration = 0;  // 1-based
  UpdateStage stage = UpdateStage::G;
  Eigen::Index rank = 0;
  Eigen::Index columns = 0;

  bool deficient() const { return rank < columns; }
};

struct ReceiverOutput {
  CMatrix user_to_ris_est;  // Nr x K
  CMatrix ris_to_bs_est;    // N x Nr
  CMatrix symbols_est;      // K x T
  std::vector<double> residuals;      // normalized fit eps(j), one per iteration
  std::vector<double> sub_residuals;  // fit after each sub-update (3 per iteration)
  int iterations = 0;
  bool converged = false;
  std::vector<EffectiveRankRecord> effective_ranks;

  bool any_rank_deficiency() const {
    for (const auto& r : effective_ranks)
      if (r.deficient()) return true;
    return false;
  }
};

namespace detail {

inline void require(bool ok, const char* msg) {
  if (!ok) throw DimensionError(msg);
}

struct SideDims {
  Eigen::Index blocks, m, n, nr, k;
};

inline SideDims side_dims(const KnownSideInfo& side) {
  require(!side.selections.empty(), "receiver: empty selection list");
  SideDims d{};
  d.blocks = static_cast<Eigen::Index>(side.selections.size());
  d.m = side.selections.front().rows();
  d.n = side.selections.front().cols();
  d.nr = side.theta.cols();
  d.k = side.coding.cols();
  require(side.theta.rows() == d.blocks, "receiver: theta rows must equal block count");
  return d;
}

}  // namespace detail

// --- Protocol 1 regression builders ----------------------------------------

/// Regression matrix of the G update: vertical stack over slots p of
/// kron((D_p(C) X)^T, Q) with Q the IM x Nr aggregate spatial response.
/// Shape IMTP x NrK, acting on vec(G).
inline CMatrix pf_build_wg(const KnownSideInfo& side, const CMatrix& ris_to_bs,
                           const CMatrix& symbols) {
  const auto d = detail::side_dims(side);
  detail::require(ris_to_bs.rows() == d.n && ris_to_bs.cols() == d.nr,
                  "pf_build_wg: H must be N x Nr");
  detail::require(symbols.rows() == d.k, "pf_build_wg: X rows must equal user count");
  const CMatrix q = stack_block_responses(side.selections, ris_to_bs, side.theta);
  const auto slots = side.coding.rows();
  const auto t_len = symbols.cols();
  CMatrix wg(d.blocks * d.m * t_len * slots, d.nr * d.k);
  for (Eigen::Index p = 0; p < slots; ++p) {
    const CMatrix coded = diag_from_row(side.coding, p) * symbols;  // K x T
    wg.middleRows(p * d.blocks * d.m * t_len, d.blocks * d.m * t_len) =
        kron(coded.transpose(), q);
  }
  return wg;
}

/// Regression matrix of the H update: vertical stack over blocks i of
/// kron(B_i^T, S_i), where B_i = D_i(theta) [R_1 ... R_P] and
/// R_p = G D_p(C) X. Shape IMTP x NNr, acting on vec(H); pairs with the
/// per-block slot-concatenated observation.
inline CMatrix pf_build_wh(const KnownSideInfo& side, const CMatrix& user_to_ris,
                           const CMatrix& symbols) {
  const auto d = detail::side_dims(side);
  detail::require(user_to_ris.rows() == d.nr && user_to_ris.cols() == d.k,
                  "pf_build_wh: G must be Nr x K");
  detail::require(symbols.rows() == d.k, "pf_build_wh: X rows must equal user count");
  const auto slots = side.coding.rows();
  const auto t_len = symbols.cols();
  CMatrix r_aux(d.nr, slots * t_len);  // cascaded transmit signal, slot-concatenated
  for (Eigen::Index p = 0; p < slots; ++p)
    r_aux.middleCols(p * t_len, t_len) = user_to_ris * diag_from_row(side.coding, p) * symbols;
  CMatrix wh(d.blocks * d.m * t_len * slots, d.n * d.nr);
  for (Eigen::Index i = 0; i < d.blocks; ++i) {
    const CMatrix b_i = diag_from_row(side.theta, i) * r_aux;
    wh.middleRows(i * d.m * t_len * slots, d.m * t_len * slots) =
        kron(b_i.transpose(), side.selections[static_cast<std::size_t>(i)]);
  }
  return wh;
}

/// Global sensing matrix of the symbol update: vertical stack over slots of
/// B_p = Q G D_p(C). Shape IMP x K; pairs with the stacked frontal slices.
inline CMatrix pf_build_btotal(const KnownSideInfo& side, const CMatrix& user_to_ris,
                               const CMatrix& ris_to_bs) {
  const auto d = detail::side_dims(side);
  detail::require(ris_to_bs.rows() == d.n && ris_to_bs.cols() == d.nr,
                  "pf_build_btotal: H must be N x Nr");
  detail::require(user_to_ris.rows() == d.nr && user_to_ris.cols() == d.k,
                  "pf_build_btotal: G must be Nr x K");
  const CMatrix q = stack_block_responses(side.selections, ris_to_bs, side.theta);
  const CMatrix w = q * user_to_ris;
  const auto slots = side.coding.rows();
  CMatrix b(d.blocks * d.m * slots, d.k);
  for (Eigen::Index p = 0; p < slots; ++p)
    b.middleRows(p * d.blocks * d.m, d.blocks * d.m) = w * diag_from_row(side.coding, p);
  return b;
}

// --- Protocol 2 regression builders ----------------------------------------

/// Regression matrix of the G update: vertical stack over blocks of
/// kron(X^T D_i(C), S_i H D_i(theta)) (the mixed-product collapse of
/// (X^T kron S_i H)(D_i(C) kron D_i(theta))). Shape MTI x NrK.
inline CMatrix npf_build_wg(const KnownSideInfo& side, const CMatrix& ris_to_bs,
                            const CMatrix& symbols) {
  const auto d = detail::side_dims(side);
  detail::require(side.coding.rows() == d.blocks, "npf_build_wg: coding must have I rows");
  detail::require(ris_to_bs.rows() == d.n && ris_to_bs.cols() == d.nr,
                  "npf_build_wg: H must be N x Nr");
  detail::require(symbols.rows() == d.k, "npf_build_wg: X rows must equal user count");
  const auto t_len = symbols.cols();
  CMatrix wg(d.m * t_len * d.blocks, d.nr * d.k);
  for (Eigen::Index i = 0; i < d.blocks; ++i) {
    const CMatrix left = symbols.transpose() * diag_from_row(side.coding, i);  // T x K
    const CMatrix right = side.selections[static_cast<std::size_t>(i)] * ris_to_bs *
                          diag_from_row(side.theta, i);  // M x Nr
    wg.middleRows(i * d.m * t_len, d.m * t_len) = kron(left, right);
  }
  return wg;
}

/// Regression matrix of the H update: vertical stack over blocks of
/// kron(R_i^T, S_i) with R_i = D_i(theta) G D_i(C) X. Shape MTI x NNr.
inline CMatrix npf_build_wh(const KnownSideInfo& side, const CMatrix& user_to_ris,
                            const CMatrix& symbols) {
  const auto d = detail::side_dims(side);
  detail::require(side.coding.rows() == d.blocks, "npf_build_wh: coding must have I rows");
  detail::require(user_to_ris.rows() == d.nr && user_to_ris.cols() == d.k,
                  "npf_build_wh: G must be Nr x K");
  detail::require(symbols.rows() == d.k, "npf_build_wh: X rows must equal user count");
  const auto t_len = symbols.cols();
  CMatrix wh(d.m * t_len * d.blocks, d.n * d.nr);
  for (Eigen::Index i = 0; i < d.blocks; ++i) {
    const CMatrix r_i = diag_from_row(side.theta, i) * user_to_ris *
                        diag_from_row(side.coding, i) * symbols;  // Nr x T
    wh.middleRows(i * d.m * t_len, d.m * t_len) =
        kron(r_i.transpose(), side.selections[static_cast<std::size_t>(i)]);
  }
  return wh;
}

/// Global sensing matrix of the symbol update: vertical stack over blocks of
/// S_i H D_i(theta) G D_i(C). Shape IM x K.
inline CMatrix npf_build_btotal(const KnownSideInfo& side, const CMatrix& user_to_ris,
                                const CMatrix& ris_to_bs) {
  const auto d = detail::side_dims(side);
  detail::require(side.coding.rows() == d.blocks, "npf_build_btotal: coding must have I rows");
  detail::require(ris_to_bs.rows() == d.n && ris_to_bs.cols() == d.nr,
                  "npf_build_btotal: H must be N x Nr");
  detail::require(user_to_ris.rows() == d.nr && user_to_ris.cols() == d.k,
                  "npf_build_btotal: G must be Nr x K");
  CMatrix b(d.blocks * d.m, d.k);
  for (Eigen::Index i = 0; i < d.blocks; ++i)
    b.middleRows(i * d.m, d.m) = side.selections[static_cast<std::size_t>(i)] * ris_to_bs *
                                 diag_from_row(side.theta, i) * user_to_ris *
                                 diag_from_row(side.coding, i);
  return b;
}

// --- observation vector assembly --------------------------------------------

/// Vertical stack of the frontal slices: the data side of the symbol update
/// for both protocols.
inline CMatrix stacked_slices(const CTensor3& y) {
  CMatrix out(y.dim1() * y.dim3(), y.dim2());
  for (Eigen::Index s = 0; s < y.dim3(); ++s)
    out.middleRows(s * y.dim1(), y.dim1()) = y.slice(s);
  return out;
}

/// Protocol 1 data vector for the G update: slice vectorizations in slot
/// order (length IMTP).
inline CVector pf_observation_g(const CTensor3& y) {
  const auto per_slice = y.dim1() * y.dim2();
  CVector out(per_slice * y.dim3());
  for (Eigen::Index p = 0; p < y.dim3(); ++p) out.segment(p * per_slice, per_slice) = vec(y.slice(p));
  return out;
}

/// Protocol 1 data vector for the H update: per block, the slot-wise
/// horizontal concatenation [Y_{i,1} ... Y_{i,P}] vectorized column-major
/// (length IMTP).
inline CVector pf_observation_h(const CTensor3& y, Eigen::Index blocks) {
  const auto m = y.dim1() / blocks;
  const auto t_len = y.dim2();
  const auto slots = y.dim3();
  CVector out(y.dim1() * t_len * slots);
  Eigen::Index pos = 0;
  for (Eigen::Index i = 0; i < blocks; ++i)
    for (Eigen::Index p = 0; p < slots; ++p)
      for (Eigen::Index t = 0; t < t_len; ++t) {
        out.segment(pos, m) = y.slice(p).block(i * m, t, m, 1);
        pos += m;
      }
  return out;
}

/// Protocol 2 data vector, shared by the G and H updates: slice
/// vectorizations in block order (length MTI).
inline CVector npf_observation(const CTensor3& y) {
  const auto per_slice = y.dim1() * y.dim2();
  CVector out(per_slice * y.dim3());
  for (Eigen::Index i = 0; i < y.dim3(); ++i) out.segment(i * per_slice, per_slice) = vec(y.slice(i));
  return out;
}

// --- trilinear ALS loop ------------------------------------------------------

namespace detail {

struct TalsProblem {
  std::function<CMatrix(const CMatrix& h, const CMatrix& x)> build_wg;
  std::function<CMatrix(const CMatrix& g, const CMatrix& x)> build_wh;
  std::function<CMatrix(const CMatrix& g, const CMatrix& h)> build_btotal;
  CVector y_g;        // data for the G update
  CVector y_h;        // data for the H update
  CMatrix y_stacked;  // data for the X update and the fit residual
  Eigen::Index n, nr, k, t_len;
};

// Alternating exact LS on the three factor groups. Every sub-update minimizes
// the same global squared fit, so the recorded sub-residual sequence is
// non-increasing up to roundoff.
inline ReceiverOutput run_tals(const TalsProblem& prob, const TalsOptions& opt, Rng& rng) {
  if (opt.delta <= 0.0) throw std::invalid_argument("TalsOptions: delta must be positive");
  if (opt.max_iters < 1) throw std::invalid_argument("TalsOptions: max_iters must be >= 1");

  ReceiverOutput out;
  auto random_init = [&rng](Eigen::Index r, Eigen::Index c) {
    CMatrix m(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
      for (Eigen::Index i = 0; i < r; ++i) m(i, j) = rng.cgaussian();
    return m;
  };
  if (opt.init_ris_to_bs) {
    require(opt.init_ris_to_bs->rows() == prob.n && opt.init_ris_to_bs->cols() == prob.nr,
            "tals: init H has wrong shape");
    out.ris_to_bs_est = *opt.init_ris_to_bs;
  } else {
    out.ris_to_bs_est = random_init(prob.n, prob.nr);
  }
  if (opt.init_symbols) {
    require(opt.init_symbols->rows() == prob.k && opt.init_symbols->cols() == prob.t_len,
            "tals: init X has wrong shape");
    out.symbols_est = *opt.init_symbols;
  } else {
    out.symbols_est = random_init(prob.k, prob.t_len);
  }
  out.user_to_ris_est = CMatrix::Zero(prob.nr, prob.k);

  const double y_power = prob.y_stacked.squaredNorm();
  if (y_power == 0.0) throw DegenerateInputError("tals: all-zero observation");

  auto fit = [&](const CMatrix& g, const CMatrix& h, const CMatrix& x) {
    return (prob.y_stacked - prob.build_btotal(g, h) * x).squaredNorm() / y_power;
  };

  double eps_prev = std::numeric_limits<double>::infinity();
  for (int iter = 1; iter <= opt.max_iters; ++iter) {
    {
      const CMatrix wg = prob.build_wg(out.ris_to_bs_est, out.symbols_est);
      const LsqSolution g = pinv_solve(wg, prob.y_g, opt.pinv_rel_tol);
      out.user_to_ris_est = unvec(g.value.col(0), prob.nr, prob.k);
      out.effective_ranks.push_back({iter, UpdateStage::G, g.effective_rank, wg.cols()});
    }
    out.sub_residuals.push_back(fit(out.user_to_ris_est, out.ris_to_bs_est, out.symbols_est));
    {
      const CMatrix wh = prob.build_wh(out.user_to_ris_est, out.symbols_est);
      const LsqSolution h = pinv_solve(wh, prob.y_h, opt.pinv_rel_tol);
      out.ris_to_bs_est = unvec(h.value.col(0), prob.n, prob.nr);
      out.effective_ranks.push_back({iter, UpdateStage::H, h.effective_rank, wh.cols()});
    }
    out.sub_residuals.push_back(fit(out.user_to_ris_est, out.ris_to_bs_est, out.symbols_est));

    const CMatrix btotal = prob.build_btotal(out.user_to_ris_est, out.ris_to_bs_est);
    const LsqSolution x = pinv_solve(btotal, prob.y_stacked, opt.pinv_rel_tol);
    out.symbols_est = x.value;
    out.effective_ranks.push_back({iter, UpdateStage::X, x.effective_rank, btotal.cols()});

    const double eps = (prob.y_stacked - btotal * out.symbols_est).squaredNorm() / y_power;
    out.sub_residuals.push_back(eps);
    out.residuals.push_back(eps);
    out.iterations = iter;
    if (!std::isfinite(eps)) throw NumericError("tals: non-finite fit residual", iter);
    if (std::abs(eps - eps_prev) < opt.delta) {
      out.converged = true;
      break;
    }
    eps_prev = eps;
  }
  return out;
}

}  // namespace detail

/// Semi-blind trilinear-ALS receiver for Protocol 1: alternates exact LS
/// updates of G, H, and X against the stacked observations until the
/// normalized fit stalls or the iteration cap is hit.
inline ReceiverOutput pf_tals(const ObservationTensor& y, const KnownSideInfo& side,
                              const TalsOptions& opt, Rng& rng) {
  if (y.protocol != Protocol::P1)
    throw std::logic_error("pf_tals: observation does not follow the Protocol 1 layout");
  const auto d = detail::side_dims(side);
  detail::require(y.data.dim1() == d.blocks * d.m, "pf_tals: tensor rows must equal I*M");
  detail::require(y.data.dim3() == side.coding.rows(), "pf_tals: tensor depth must equal P");

  detail::TalsProblem prob;
  prob.build_wg = [&side](const CMatrix& h, const CMatrix& x) { return pf_build_wg(side, h, x); };
  prob.build_wh = [&side](const CMatrix& g, const CMatrix& x) { return pf_build_wh(side, g, x); };
  prob.build_btotal = [&side](const CMatrix& g, const CMatrix& h) {
    return pf_build_btotal(side, g, h);
  };
  prob.y_g = pf_observation_g(y.data);
  prob.y_h = pf_observation_h(y.data, d.blocks);
  prob.y_stacked = stacked_slices(y.data);
  prob.n = d.n;
  prob.nr = d.nr;
  prob.k = d.k;
  prob.t_len = y.data.dim2();
  return detail::run_tals(prob, opt, rng);
}

/// Semi-blind trilinear-ALS receiver for Protocol 2 (slice-varying spatial
/// factor); same loop contract as pf_tals with the Protocol 2 builders.
inline ReceiverOutput npf_tals(const ObservationTensor& y, const KnownSideInfo& side,
                               const TalsOptions& opt, Rng& rng) {
  if (y.protocol != Protocol::P2)
    throw std::logic_error("npf_tals: observation does not follow the Protocol 2 layout");
  const auto d = detail::side_dims(side);
  detail::require(y.data.dim1() == d.m, "npf_tals: tensor rows must equal M");
  detail::require(y.data.dim3() == d.blocks, "npf_tals: tensor depth must equal I");
  detail::require(side.coding.rows() == d.blocks, "npf_tals: coding must have I rows");

  detail::TalsProblem prob;
  prob.build_wg = [&side](const CMatrix& h, const CMatrix& x) { return npf_build_wg(side, h, x); };
  prob.build_wh = [&side](const CMatrix& g, const CMatrix& x) { return npf_build_wh(side, g, x); };
  prob.build_btotal = [&side](const CMatrix& g, const CMatrix& h) {
    return npf_build_btotal(side, g, h);
  };
  prob.y_g = npf_observation(y.data);
  prob.y_h = prob.y_g;  // both updates consume the same block-ordered vector
  prob.y_stacked = stacked_slices(y.data);
  prob.n = d.n;
  prob.nr = d.nr;
  prob.k = d.k;
  prob.t_len = y.data.dim2();
  return detail::run_tals(prob, opt, rng);
}

}  // namespace risfa
