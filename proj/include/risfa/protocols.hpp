// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include <risfa/channel.hpp>
#include <risfa/config.hpp>
#include <risfa/matrix.hpp>
#include <risfa/rng.hpp>

namespace risfa {

class IoError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Received-signal tensor plus the noise bookkeeping of the run.
/// Protocol 1: IM x T x P, frontal slice p stacks the I per-block
/// observations of coding slot p (block index varies slowest, antenna row
/// fastest). Protocol 2: M x T x I, frontal slice i is the block-i
/// observation.
struct ObservationTensor {
  Protocol protocol = Protocol::P1;
  CTensor3 data;
  double snr_db = std::numeric_limits<double>::infinity();
  double noise_variance = 0.0;  // per complex entry, for reference
};

namespace detail {

inline void require_shapes(const ChannelSet& ch, const Schedule& sch, const SymbolMatrix& x,
                           int coding_rows_expected, const char* where) {
  const auto blocks = static_cast<Eigen::Index>(sch.selections.size());
  if (blocks < 1) throw DimensionError(std::string(where) + ": empty selection list");
  const auto m = sch.selections.front().rows();
  const auto n = sch.selections.front().cols();
  for (const auto& s : sch.selections)
    if (s.rows() != m || s.cols() != n)
      throw DimensionError(std::string(where) + ": selection shapes differ across blocks");
  if (ch.ris_to_bs.rows() != n)
    throw DimensionError(std::string(where) + ": H rows do not match port count");
  const auto nr = ch.ris_to_bs.cols();
  if (sch.theta.rows() != blocks || sch.theta.cols() != nr)
    throw DimensionError(std::string(where) + ": theta must be I x Nr");
  if (ch.user_to_ris.rows() != nr)
    throw DimensionError(std::string(where) + ": G rows do not match RIS size");
  const auto k = ch.user_to_ris.cols();
  if (sch.coding.cols() != k)
    throw DimensionError(std::string(where) + ": coding columns do not match user count");
  if (sch.coding.rows() != coding_rows_expected)
    throw DimensionError(std::string(where) + ": coding has " + std::to_string(sch.coding.rows()) +
                         " rows, expected " + std::to_string(coding_rows_expected));
  if (x.symbols.rows() != k)
    throw DimensionError(std::string(where) + ": symbol rows do not match user count");
}

}  // namespace detail

/// Aggregate spatial response: vertical stack over blocks of
/// S_i * H * D_i(theta), shape IM x Nr. Invariant across coding slots under
/// Protocol 1.
inline CMatrix stack_block_responses(const std::vector<CMatrix>& selections,
                                     const CMatrix& ris_to_bs, const CMatrix& theta) {
  const auto blocks = static_cast<Eigen::Index>(selections.size());
  const auto m = selections.front().rows();
  const auto nr = ris_to_bs.cols();
  CMatrix q(blocks * m, nr);
  for (Eigen::Index i = 0; i < blocks; ++i)
    q.middleRows(i * m, m) = selections[static_cast<std::size_t>(i)] * ris_to_bs *
                             diag_from_row(theta, i);
  return q;
}

/// Noiseless Protocol 1 tensor (IM x T x P): slice p stacks
/// S_i H D_i(theta) G D_p(C) X over blocks i.
inline CTensor3 synth_p1(const ChannelSet& ch, const Schedule& sch, const SymbolMatrix& x) {
  detail::require_shapes(ch, sch, x, static_cast<int>(sch.coding.rows()), "synth_p1");
  const CMatrix q = stack_block_responses(sch.selections, ch.ris_to_bs, sch.theta);
  const CMatrix w = q * ch.user_to_ris;  // IM x K global spatial factor
  std::vector<CMatrix> slices;
  slices.reserve(static_cast<std::size_t>(sch.coding.rows()));
  for (Eigen::Index p = 0; p < sch.coding.rows(); ++p)
    slices.push_back(w * diag_from_row(sch.coding, p) * x.symbols);
  return CTensor3(std::move(slices));
}

/// Noiseless Protocol 2 tensor (M x T x I): slice i is
/// S_i H D_i(theta) G D_i(C) X.
inline CTensor3 synth_p2(const ChannelSet& ch, const Schedule& sch, const SymbolMatrix& x) {
  const auto blocks = static_cast<Eigen::Index>(sch.selections.size());
  detail::require_shapes(ch, sch, x, static_cast<int>(blocks), "synth_p2");
  std::vector<CMatrix> slices;
  slices.reserve(static_cast<std::size_t>(blocks));
  for (Eigen::Index i = 0; i < blocks; ++i)
    slices.push_back(sch.selections[static_cast<std::size_t>(i)] * ch.ris_to_bs *
                     diag_from_row(sch.theta, i) * ch.user_to_ris *
                     diag_from_row(sch.coding, i) * x.symbols);
  return CTensor3(std::move(slices));
}

/// Adds circularly-symmetric white Gaussian noise calibrated so that the
/// per-entry average signal power over the noise variance equals snr_db.
/// snr_db = +inf returns the clean tensor unchanged. Draw order is fixed
/// (slice-major, column-major within a slice), so results depend only on the
/// rng seed.
inline ObservationTensor add_awgn(const CTensor3& clean, Protocol protocol, double snr_db,
                                  Rng& rng) {
  ObservationTensor out;
  out.protocol = protocol;
  out.snr_db = snr_db;
  if (std::isinf(snr_db) && snr_db > 0) {
    out.data = clean;
    out.noise_variance = 0.0;
    return out;
  }
  const double total_entries =
      static_cast<double>(clean.dim1() * clean.dim2() * clean.dim3());
  const double signal_power = fro_norm(clean) * fro_norm(clean) / total_entries;
  if (signal_power == 0.0)
    throw DegenerateInputError("add_awgn: all-zero signal with finite SNR");
  const double sigma2 = signal_power / std::pow(10.0, snr_db / 10.0);
  const double scale = std::sqrt(sigma2);
  std::vector<CMatrix> noisy = clean.slices();
  for (auto& s : noisy)
    for (Eigen::Index j = 0; j < s.cols(); ++j)
      for (Eigen::Index i = 0; i < s.rows(); ++i) s(i, j) += scale * rng.cgaussian();
  out.data = CTensor3(std::move(noisy));
  out.noise_variance = sigma2;
  return out;
}

/// Mode-3 unfolding of a Protocol 1 tensor: P x IMT, row p = vec(slice p)^T
/// (antenna row fastest, then symbol time).
inline CMatrix unfold_mode3_p1(const ObservationTensor& y) {
  if (y.protocol != Protocol::P1)
    throw std::logic_error("unfold_mode3_p1: tensor does not follow the Protocol 1 layout");
  const auto rows = y.data.dim3();
  const auto cols = y.data.dim1() * y.data.dim2();
  CMatrix out(rows, cols);
  for (Eigen::Index p = 0; p < rows; ++p)
    out.row(p) = vec(y.data.slice(p)).transpose();
  return out;
}

// ---------------------------------------------------------------------------
// Flat binary layout (little-endian), documented in the README:
//   bytes 0..7   magic "RISFAOT1"
//   u32          protocol (1 or 2)
//   u32 x 3      d1, d2, d3
//   f64          snr_db (IEEE-754; +inf allowed)
//   f64          noise_variance
//   payload      d3 slices, each column-major, each entry re then im as f64
// ---------------------------------------------------------------------------

namespace detail {

static_assert(std::endian::native == std::endian::little,
              "observation file format is little-endian; add byte swapping for this target");

inline constexpr std::array<char, 8> kObsMagic = {'R', 'I', 'S', 'F', 'A', 'O', 'T', '1'};

template <typename T>
void write_pod(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw IoError("observation file truncated");
  return v;
}

}  // namespace detail

inline void write_observation(const std::string& path, const ObservationTensor& y) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  os.write(detail::kObsMagic.data(), detail::kObsMagic.size());
  detail::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(y.protocol));
  detail::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(y.data.dim1()));
  detail::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(y.data.dim2()));
  detail::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(y.data.dim3()));
  detail::write_pod<double>(os, y.snr_db);
  detail::write_pod<double>(os, y.noise_variance);
  for (const auto& s : y.data.slices())
    for (Eigen::Index j = 0; j < s.cols(); ++j)
      for (Eigen::Index i = 0; i < s.rows(); ++i) {
        detail::write_pod<double>(os, s(i, j).real());
        detail::write_pod<double>(os, s(i, j).imag());
      }
  if (!os) throw IoError("failed writing " + path);
}

inline ObservationTensor read_observation(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  std::array<char, 8> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != detail::kObsMagic) throw IoError(path + ": not an observation file");
  const auto proto = detail::read_pod<std::uint32_t>(is);
  if (proto != 1 && proto != 2) throw IoError(path + ": bad protocol id");
  const auto d1 = detail::read_pod<std::uint32_t>(is);
  const auto d2 = detail::read_pod<std::uint32_t>(is);
  const auto d3 = detail::read_pod<std::uint32_t>(is);
  if (d1 < 1 || d2 < 1 || d3 < 1) throw IoError(path + ": bad dimensions");
  ObservationTensor out;
  out.protocol = proto == 1 ? Protocol::P1 : Protocol::P2;
  out.snr_db = detail::read_pod<double>(is);
  out.noise_variance = detail::read_pod<double>(is);
  std::vector<CMatrix> slices(d3, CMatrix(d1, d2));
  for (auto& s : slices)
    for (Eigen::Index j = 0; j < s.cols(); ++j)
      for (Eigen::Index i = 0; i < s.rows(); ++i) {
        const double re = detail::read_pod<double>(is);
        const double im = detail::read_pod<double>(is);
        s(i, j) = cxd(re, im);
      }
  out.data = CTensor3(std::move(slices));
  return out;
}

}  // namespace risfa
