// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <vector>

#include <risfa/config.hpp>
#include <risfa/matrix.hpp>
#include <risfa/rng.hpp>

namespace risfa {

/// Ground-truth propagation matrices.
struct ChannelSet {
  CMatrix ris_to_bs;   // N x Nr
  CMatrix user_to_ris; // Nr x K
};

/// Per-frame side information assumed known at the base station: fluid-antenna
/// port selections per block, RIS phase rows, and the temporal coding matrix.
struct Schedule {
  std::vector<CMatrix> selections;  // I matrices, each M x N binary
  CMatrix theta;                    // I x Nr, unit modulus
  CMatrix coding;                   // P x K (P1) or I x K (P2), unit modulus
};

/// Unit-average-energy constellation; the point index is the bit payload
/// (Gray-coded per I/Q rail).
struct Constellation {
  Modulation kind = Modulation::QPSK;
  int bits_per_symbol = 2;
  std::vector<cxd> points;

  int order() const { return static_cast<int>(points.size()); }

  int nearest(cxd x) const {
    int best = 0;
    double best_d = std::norm(x - points[0]);
    for (int q = 1; q < order(); ++q) {
      const double d = std::norm(x - points[q]);
      if (d < best_d) {
        best_d = d;
        best = q;
      }
    }
    return best;
  }
};

inline Constellation make_constellation(Modulation kind) {
  Constellation c;
  c.kind = kind;
  switch (kind) {
    case Modulation::BPSK:
      c.bits_per_symbol = 1;
      c.points = {cxd(1, 0), cxd(-1, 0)};
      break;
    case Modulation::QPSK: {
      c.bits_per_symbol = 2;
      const double a = 1.0 / std::sqrt(2.0);
      // bit0 (MSB) flips the real rail, bit1 the imaginary rail
      c.points.resize(4);
      for (int q = 0; q < 4; ++q)
        c.points[q] = cxd((q & 2) ? -a : a, (q & 1) ? -a : a);
      break;
    }
    case Modulation::QAM16: {
      c.bits_per_symbol = 4;
      // Gray-coded 4-PAM per rail: 00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3
      const double levels[4] = {-3, -1, +1, +3};
      const int gray_to_level[4] = {0, 1, 3, 2};
      const double scale = 1.0 / std::sqrt(10.0);
      c.points.resize(16);
      for (int q = 0; q < 16; ++q) {
        const int gi = (q >> 2) & 3, gq = q & 3;
        c.points[q] = scale * cxd(levels[gray_to_level[gi]], levels[gray_to_level[gq]]);
      }
      break;
    }
  }
  return c;
}

/// Transmitted symbol block plus the payload needed for error counting:
/// points(k, t) is the constellation index whose bits are the (k, t) payload.
struct SymbolMatrix {
  CMatrix symbols;          // K x T
  Eigen::MatrixXi points;   // K x T indices into the constellation
  Modulation modulation = Modulation::QPSK;
};

/// i.i.d. CN(0,1) Rayleigh draws for both hops, column-major fill order.
inline ChannelSet gen_channels(const SystemConfig& cfg, Rng& rng) {
  auto fill = [&](Eigen::Index r, Eigen::Index c) {
    CMatrix m(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
      for (Eigen::Index i = 0; i < r; ++i) m(i, j) = rng.cgaussian();
    return m;
  };
  ChannelSet ch;
  ch.ris_to_bs = fill(cfg.total_ports, cfg.ris_elements);
  ch.user_to_ris = fill(cfg.ris_elements, cfg.users);
  return ch;
}

/// One M x N selection matrix per block: row m activates one of M distinct
/// ports drawn uniformly without replacement (partial Fisher-Yates), re-drawn
/// independently per block. Satisfies S * S^H = I_M by construction.
inline std::vector<CMatrix> gen_selections(const SystemConfig& cfg, Rng& rng) {
  const int m = cfg.active_antennas, n = cfg.total_ports;
  if (m > n) throw ConfigError("gen_selections: M exceeds N");
  std::vector<CMatrix> out;
  out.reserve(static_cast<std::size_t>(cfg.blocks));
  std::vector<int> ports(static_cast<std::size_t>(n));
  for (int i = 0; i < cfg.blocks; ++i) {
    std::iota(ports.begin(), ports.end(), 0);
    CMatrix s = CMatrix::Zero(m, n);
    for (int row = 0; row < m; ++row) {
      const auto j = row + static_cast<int>(rng.bounded(static_cast<std::uint64_t>(n - row)));
      std::swap(ports[static_cast<std::size_t>(row)], ports[static_cast<std::size_t>(j)]);
      s(row, ports[static_cast<std::size_t>(row)]) = 1.0;
    }
    out.push_back(std::move(s));
  }
  return out;
}

namespace detail {

// I x C block of the L-point DFT with L = max(rows, cols): unit modulus, and
// orthogonal columns (gram = rows * I) whenever rows >= cols.
inline CMatrix truncated_dft(int rows, int cols) {
  const int l = std::max(rows, cols);
  CMatrix out(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      const double phase = -2.0 * std::numbers::pi * static_cast<double>(i) *
                           static_cast<double>(j) / static_cast<double>(l);
      out(i, j) = std::polar(1.0, phase);
    }
  return out;
}

inline CMatrix random_unit_modulus(int rows, int cols, Rng& rng) {
  CMatrix out(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i)
      out(i, j) = std::polar(1.0, 2.0 * std::numbers::pi * rng.uniform01());
  return out;
}

}  // namespace detail

/// RIS phase rows, one per block. DFT mode takes the first Nr columns of the
/// I-point DFT when I >= Nr (maximally diverse, deterministic) and the first
/// I rows of the Nr-point DFT otherwise.
inline CMatrix gen_theta(const SystemConfig& cfg, Rng& rng) {
  if (cfg.theta_mode == ScheduleMode::DFT)
    return detail::truncated_dft(cfg.blocks, cfg.ris_elements);
  return detail::random_unit_modulus(cfg.blocks, cfg.ris_elements, rng);
}

/// Temporal coding matrix: P x K under Protocol 1, I x K under Protocol 2.
/// DFT mode is deterministic and requires at least K rows.
inline CMatrix gen_coding(const SystemConfig& cfg, Rng& rng) {
  const int rows = cfg.protocol == Protocol::P1 ? cfg.slots : cfg.blocks;
  if (cfg.coding_mode == ScheduleMode::DFT) {
    if (rows < cfg.users)
      throw ConfigError("gen_coding: DFT mode needs " +
                        std::string(cfg.protocol == Protocol::P1 ? "P" : "I") + " >= K");
    return detail::truncated_dft(rows, cfg.users);
  }
  return detail::random_unit_modulus(rows, cfg.users, rng);
}

/// Uniform i.i.d. constellation indices, column-major draw order.
inline SymbolMatrix gen_symbols(const SystemConfig& cfg, Rng& rng) {
  const Constellation con = make_constellation(cfg.modulation);
  SymbolMatrix x;
  x.modulation = cfg.modulation;
  x.symbols.resize(cfg.users, cfg.symbols_per_block);
  x.points.resize(cfg.users, cfg.symbols_per_block);
  for (int t = 0; t < cfg.symbols_per_block; ++t)
    for (int k = 0; k < cfg.users; ++k) {
      const int q = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(con.order())));
      x.points(k, t) = q;
      x.symbols(k, t) = con.points[static_cast<std::size_t>(q)];
    }
  return x;
}

/// Full schedule in the documented draw order: selections, theta, coding.
inline Schedule gen_schedule(const SystemConfig& cfg, Rng& rng) {
  Schedule sch;
  sch.selections = gen_selections(cfg, rng);
  sch.theta = gen_theta(cfg, rng);
  sch.coding = gen_coding(cfg, rng);
  return sch;
}

}  // namespace risfa
