// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace risfa {

enum class Protocol { P1 = 1, P2 = 2 };

enum class Modulation { BPSK, QPSK, QAM16 };

// DFT: deterministic truncated DFT (Vandermonde) construction.
// Random: i.i.d. unit-modulus entries from the trial stream.
enum class ScheduleMode { DFT, Random };

class ConfigError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// All dimension and protocol parameters for one simulated link.
///
/// Short names used in messages and config files: M = active_antennas,
/// N = total_ports, Nr = ris_elements, K = users, I = blocks, P = slots,
/// T = symbols_per_block.
struct SystemConfig {
  int active_antennas = 4;  // RF chains selected per block (M), M <= N
  int total_ports = 6;      // candidate fluid-antenna ports (N)
  int ris_elements = 4;     // reflecting elements (Nr)
  int users = 2;            // single-antenna transmitters (K)
  int blocks = 4;           // spatial blocks per frame (I)
  int slots = 4;            // coding slots per block (P); forced to 1 under P2
  int symbols_per_block = 20;  // symbol periods (T); column 0 is the pilot
  double snr_db = 20.0;        // +inf means noiseless
  Protocol protocol = Protocol::P1;
  std::uint64_t seed = 1;
  Modulation modulation = Modulation::QPSK;
  ScheduleMode theta_mode = ScheduleMode::DFT;
  ScheduleMode coding_mode = ScheduleMode::DFT;
};

inline const char* to_string(Protocol p) { return p == Protocol::P1 ? "P1" : "P2"; }

inline const char* to_string(Modulation m) {
  switch (m) {
    case Modulation::BPSK: return "bpsk";
    case Modulation::QPSK: return "qpsk";
    case Modulation::QAM16: return "16qam";
  }
  return "?";
}

inline const char* to_string(ScheduleMode m) {
  return m == ScheduleMode::DFT ? "dft" : "random";
}

/// Checks the structural invariants; throws ConfigError naming every violated
/// field.
inline void validate(const SystemConfig& cfg) {
  std::vector<std::string> problems;
  auto positive = [&](int v, const char* name) {
    if (v < 1) problems.push_back(std::string(name) + " must be >= 1 (got " + std::to_string(v) + ")");
  };
  positive(cfg.active_antennas, "M");
  positive(cfg.total_ports, "N");
  positive(cfg.ris_elements, "Nr");
  positive(cfg.users, "K");
  positive(cfg.blocks, "I");
  positive(cfg.slots, "P");
  positive(cfg.symbols_per_block, "T");
  if (cfg.active_antennas > cfg.total_ports)
    problems.push_back("M=" + std::to_string(cfg.active_antennas) +
                       " exceeds N=" + std::to_string(cfg.total_ports));
  if (cfg.coding_mode == ScheduleMode::DFT) {
    const int rows = cfg.protocol == Protocol::P1 ? cfg.slots : cfg.blocks;
    const char* rows_name = cfg.protocol == Protocol::P1 ? "P" : "I";
    if (rows < cfg.users)
      problems.push_back(std::string("coding_mode=dft needs ") + rows_name + " >= K (" +
                         std::to_string(rows) + " < " + std::to_string(cfg.users) + ")");
  }
  if (!problems.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw ConfigError(msg);
  }
}

}  // namespace risfa
