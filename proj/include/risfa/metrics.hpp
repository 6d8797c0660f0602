// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <risfa/channel.hpp>
#include <risfa/config.hpp>
#include <risfa/matrix.hpp>
#include <risfa/receivers.hpp>

namespace risfa {

/// Effective cascaded channel: column-wise Kronecker pairing of G^T (K x Nr)
/// with H (N x Nr), giving KN x Nr. Invariant to the per-RIS-element diagonal
/// scaling freedom between G and H, which is why estimation quality is scored
/// on it.
inline CMatrix effective_channel(const CMatrix& user_to_ris, const CMatrix& ris_to_bs) {
  return khatri_rao(user_to_ris.transpose(), ris_to_bs);
}

/// Removes the per-user scaling freedom between the symbol and user-channel
/// estimates using the known first (pilot) column of X: alpha_k scales row k
/// of X-hat onto the pilot, and column k of G-hat is compensated by 1/alpha_k
/// so reconstructed data are unchanged. Reduces to the single global factor
/// when the ambiguity is global.
inline ReceiverOutput resolve_scaling(ReceiverOutput out, const CMatrix& pilot_column) {
  const auto users = out.symbols_est.rows();
  if (pilot_column.rows() != users || pilot_column.cols() != 1)
    throw DimensionError("resolve_scaling: pilot must be K x 1");
  for (Eigen::Index k = 0; k < users; ++k) {
    const cxd estimated = out.symbols_est(k, 0);
    const cxd truth = pilot_column(k, 0);
    if (std::abs(estimated) == 0.0 || std::abs(truth) == 0.0)
      throw DegenerateInputError("resolve_scaling: zero pilot entry for user " +
                                 std::to_string(k));
    const cxd alpha = truth / estimated;
    out.symbols_est.row(k) *= alpha;
    out.user_to_ris_est.col(k) /= alpha;
  }
  return out;
}

/// Normalized squared error ||est - truth||_F^2 / ||truth||_F^2.
inline double nmse(const CMatrix& est, const CMatrix& truth) {
  if (est.rows() != truth.rows() || est.cols() != truth.cols())
    throw DimensionError("nmse: shapes differ");
  const double denom = truth.squaredNorm();
  if (denom == 0.0) throw DegenerateInputError("nmse: zero reference");
  return (est - truth).squaredNorm() / denom;
}

inline double to_db(double linear) { return 10.0 * std::log10(linear); }

struct ErrorRates {
  double ber = 0.0;
  double ser = 0.0;
  long long bits = 0;
  long long bit_errors = 0;
  long long symbols = 0;
  long long symbol_errors = 0;
};

/// Hard-decision nearest-point demapping of x_hat against the recorded
/// payload. The pilot (column 0) is excluded from both counts.
inline ErrorRates demod_ber(const CMatrix& x_hat, const SymbolMatrix& x_true) {
  if (x_hat.rows() != x_true.symbols.rows() || x_hat.cols() != x_true.symbols.cols())
    throw DimensionError("demod_ber: shapes differ");
  const Constellation con = make_constellation(x_true.modulation);
  ErrorRates r;
  for (Eigen::Index t = 1; t < x_hat.cols(); ++t)
    for (Eigen::Index k = 0; k < x_hat.rows(); ++k) {
      const int decided = con.nearest(x_hat(k, t));
      const int sent = x_true.points(k, t);
      r.symbols += 1;
      r.symbol_errors += decided != sent ? 1 : 0;
      r.bits += con.bits_per_symbol;
      r.bit_errors += std::popcount(static_cast<unsigned>(decided ^ sent));
    }
  if (r.symbols > 0) {
    r.ber = static_cast<double>(r.bit_errors) / static_cast<double>(r.bits);
    r.ser = static_cast<double>(r.symbol_errors) / static_cast<double>(r.symbols);
  }
  return r;
}

struct IdentCondition {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool satisfied = false;
};

struct IdentReport {
  Protocol protocol = Protocol::P1;
  std::vector<IdentCondition> conditions;
  bool overall = false;
};

/// Evaluates the protocol's least-squares recoverability inequalities. These
/// are necessary size conditions; the report is advisory and never blocks a
/// run.
inline IdentReport check_identifiability(const SystemConfig& cfg) {
  const double m = cfg.active_antennas, n = cfg.total_ports, nr = cfg.ris_elements;
  const double k = cfg.users, i = cfg.blocks, p = cfg.slots, t = cfg.symbols_per_block;
  IdentReport rep;
  rep.protocol = cfg.protocol;
  auto add = [&rep](std::string name, double lhs, double rhs) {
    rep.conditions.push_back({std::move(name), lhs, rhs, lhs >= rhs});
  };
  if (cfg.protocol == Protocol::P1) {
    add("IMTP >= Nr*max(K,N)", i * m * t * p, nr * std::max(k, n));
    add("IM >= Nr", i * m, nr);
    add("IMP >= K", i * m * p, k);
  } else {
    add("MTI >= Nr*max(K,N)", m * t * i, nr * std::max(k, n));
    add("IM >= K", i * m, k);
  }
  rep.overall = true;
  for (const auto& c : rep.conditions) rep.overall = rep.overall && c.satisfied;
  return rep;
}

/// Dominant per-iteration flop terms of the two receivers (unit constants),
/// for reporting and sweep planning only.
inline std::pair<double, double> complexity_estimate(const SystemConfig& cfg) {
  const double m = cfg.active_antennas, n = cfg.total_ports, nr = cfg.ris_elements;
  const double k = cfg.users, i = cfg.blocks, p = cfg.slots, t = cfg.symbols_per_block;
  const double channel_cost = nr * nr * k * k + n * n * nr * nr;
  const double p1 = i * m * p * k * k + i * m * t * p * channel_cost;
  const double p2 = i * m * k * k + m * t * i * channel_cost;
  return {p1, p2};
}

/// One Monte Carlo result row.
struct MetricRecord {
  double snr_db = 0.0;
  int trial = 0;
  Protocol protocol = Protocol::P1;
  double nmse_eff = std::numeric_limits<double>::quiet_NaN();     // linear
  double nmse_eff_db = std::numeric_limits<double>::quiet_NaN();  // 10*log10
  double ber = std::numeric_limits<double>::quiet_NaN();
  double ser = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  bool converged = false;
};

inline std::string csv_header() {
  return "snr_db,trial,protocol,nmse_db,ber,ser,iters,converged";
}

namespace detail {

// Shortest-roundtrip double formatting, fixed across runs for byte-identical
// CSV output.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

inline std::string csv_row(const MetricRecord& r) {
  std::string row;
  row += detail::format_double(r.snr_db);
  row += ',' + std::to_string(r.trial);
  row += ',' + std::to_string(static_cast<int>(r.protocol));
  row += ',' + detail::format_double(r.nmse_eff_db);
  row += ',' + detail::format_double(r.ber);
  row += ',' + detail::format_double(r.ser);
  row += ',' + std::to_string(r.iterations);
  row += ',' + std::string(r.converged ? "1" : "0");
  return row;
}

}  // namespace risfa
