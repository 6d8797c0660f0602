// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <risfa/metrics.hpp>
#include <risfa/protocols.hpp>

#include "support.hpp"

using namespace risfa;
using test::make_scenario;
using test::max_abs_diff;

namespace {

double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

}  // namespace

TEST_CASE("effective_channel shapes and Khatri-Rao equivalence", "[metrics]") {
  // Scalar case: K = N = 1 reduces to the elementwise product of the rows.
  CMatrix g(2, 1), h(1, 2);
  g << cxd(2, 0), cxd(0, 1);
  h << cxd(3, 0), cxd(1, -1);
  const CMatrix eff = effective_channel(g, h);
  REQUIRE(eff.rows() == 1);
  REQUIRE(eff.cols() == 2);
  REQUIRE(eff(0, 0) == g(0, 0) * h(0, 0));
  REQUIRE(eff(0, 1) == g(1, 0) * h(0, 1));

  // Identity factors give unit columns e_k (x) e_k.
  const CMatrix i3 = CMatrix::Identity(3, 3);
  const CMatrix eff_i = effective_channel(i3, i3);
  for (int c = 0; c < 3; ++c)
    for (int r = 0; r < 9; ++r)
      REQUIRE(eff_i(r, c) == (r == c * 3 + c ? cxd(1, 0) : cxd(0, 0)));

  Rng rng(7);
  const CMatrix gg = test::random_cmatrix(rng, 4, 3);
  const CMatrix hh = test::random_cmatrix(rng, 5, 4);
  REQUIRE(max_abs_diff(effective_channel(gg, hh), khatri_rao(gg.transpose(), hh)) == 0.0);
  REQUIRE_THROWS_AS(effective_channel(test::random_cmatrix(rng, 4, 3),
                                      test::random_cmatrix(rng, 5, 3)),
                    DimensionError);
}

TEST_CASE("resolve_scaling inverts per-user scalings", "[metrics]") {
  Rng rng(11);
  ReceiverOutput out;
  const CMatrix x_true = test::random_cmatrix(rng, 3, 5);
  out.user_to_ris_est = test::random_cmatrix(rng, 4, 3);
  out.ris_to_bs_est = test::random_cmatrix(rng, 2, 4);

  const cxd c(0.4, -1.7);
  out.symbols_est = x_true / c;  // common scalar ambiguity
  const ReceiverOutput fixed = resolve_scaling(out, x_true.col(0));
  REQUIRE(max_abs_diff(fixed.symbols_est, x_true) < 1e-12);

  out.symbols_est = x_true;  // already aligned: alpha = 1, nothing moves
  const ReceiverOutput same = resolve_scaling(out, x_true.col(0));
  REQUIRE(max_abs_diff(same.symbols_est, x_true) == 0.0);
  REQUIRE(max_abs_diff(same.user_to_ris_est, out.user_to_ris_est) == 0.0);

  out.symbols_est(1, 0) = 0.0;
  REQUIRE_THROWS_AS(resolve_scaling(out, x_true.col(0)), DegenerateInputError);
}

TEST_CASE("resolve_scaling repairs a full semi-blind pipeline", "[metrics]") {
  SystemConfig cfg;
  cfg.active_antennas = 4;
  cfg.total_ports = 6;
  cfg.ris_elements = 4;
  cfg.users = 2;
  cfg.blocks = 8;
  cfg.slots = 4;
  cfg.symbols_per_block = 20;
  cfg.protocol = Protocol::P1;
  const auto s = test::recoverable_scenario(cfg, 211);
  Rng noise_rng(1);
  const ObservationTensor y = add_awgn(synth_p1(s.channels, s.schedule, s.symbols), Protocol::P1,
                                       std::numeric_limits<double>::infinity(), noise_rng);
  TalsOptions opt;
  opt.delta = 1e-26;
  opt.max_iters = 500;
  Rng rng(5);
  const ReceiverOutput raw = pf_tals(y, s.schedule, opt, rng);
  const ReceiverOutput fixed = resolve_scaling(raw, s.symbols.symbols.col(0));
  const CMatrix eff_est = effective_channel(fixed.user_to_ris_est, fixed.ris_to_bs_est);
  const CMatrix eff_true = effective_channel(s.channels.user_to_ris, s.channels.ris_to_bs);
  REQUIRE(nmse(eff_est, eff_true) < 1e-12);
  REQUIRE(max_abs_diff(fixed.symbols_est, s.symbols.symbols) < 1e-8);
}

TEST_CASE("nmse algebra", "[metrics]") {
  Rng rng(13);
  const CMatrix t = test::random_cmatrix(rng, 3, 4);
  REQUIRE(nmse(t, t) == 0.0);
  REQUIRE(nmse(CMatrix(CMatrix::Zero(3, 4)), t) == 1.0);
  REQUIRE(nmse(CMatrix(1.1 * t), t) == Catch::Approx(0.01).epsilon(1e-12));

  for (int k = 0; k < 10; ++k) {
    const cxd alpha(rng.gaussian(), rng.gaussian());
    REQUIRE(nmse(CMatrix(alpha * t), t) == Catch::Approx(std::norm(alpha - 1.0)).margin(1e-14));
  }

  REQUIRE_THROWS_AS(nmse(t, CMatrix(CMatrix::Zero(3, 4))), DegenerateInputError);
  REQUIRE_THROWS_AS(nmse(t, test::random_cmatrix(rng, 4, 3)), DimensionError);
}

TEST_CASE("demod_ber exact cases", "[metrics]") {
  SystemConfig cfg;
  cfg.users = 2;
  cfg.symbols_per_block = 100;
  cfg.modulation = Modulation::BPSK;
  Rng rng(17);
  const SymbolMatrix x = gen_symbols(cfg, rng);

  const ErrorRates perfect = demod_ber(x.symbols, x);
  REQUIRE(perfect.ber == 0.0);
  REQUIRE(perfect.ser == 0.0);
  REQUIRE(perfect.symbols == 2 * 99);  // pilot column excluded

  const ErrorRates flipped = demod_ber(CMatrix(-x.symbols), x);
  REQUIRE(flipped.ber == 1.0);
  REQUIRE(flipped.ser == 1.0);

  // Corrupting only the pilot column changes nothing.
  CMatrix pilot_bad = x.symbols;
  pilot_bad.col(0) *= -1.0;
  REQUIRE(demod_ber(pilot_bad, x).ber == 0.0);
}

TEST_CASE("QPSK quarter rotation destroys every symbol", "[metrics]") {
  SystemConfig cfg;
  cfg.users = 2;
  cfg.symbols_per_block = 500;
  Rng rng(19);
  const SymbolMatrix x = gen_symbols(cfg, rng);
  const CMatrix rotated = cxd(0, 1) * x.symbols;  // maps each point onto a neighbor
  REQUIRE(demod_ber(rotated, x).ser == 1.0);
}

TEST_CASE("QPSK over AWGN matches the closed-form bit error rate", "[metrics]") {
  SystemConfig cfg;
  cfg.users = 2;
  cfg.symbols_per_block = 50001;  // 1e5 counted symbols after the pilot
  Rng rng(23);
  const SymbolMatrix x = gen_symbols(cfg, rng);

  const double snr_db = 10.0;
  const double sigma = std::sqrt(std::pow(10.0, -snr_db / 10.0));
  CMatrix noisy = x.symbols;
  for (Eigen::Index j = 0; j < noisy.cols(); ++j)
    for (Eigen::Index i = 0; i < noisy.rows(); ++i) noisy(i, j) += sigma * rng.cgaussian();

  const ErrorRates r = demod_ber(noisy, x);
  const double expected = q_function(std::sqrt(std::pow(10.0, snr_db / 10.0)));
  const double std_err = std::sqrt(expected * (1.0 - expected) / static_cast<double>(r.bits));
  REQUIRE(std::abs(r.ber - expected) <= 3.0 * std_err);
}

TEST_CASE("identifiability reports match hand arithmetic", "[metrics]") {
  SystemConfig cfg;
  cfg.active_antennas = 8;
  cfg.total_ports = 10;
  cfg.ris_elements = 16;
  cfg.users = 4;
  cfg.blocks = 10;
  cfg.slots = 5;
  cfg.symbols_per_block = 200;
  cfg.protocol = Protocol::P1;
  const IdentReport rep = check_identifiability(cfg);
  REQUIRE(rep.conditions.size() == 3);
  REQUIRE(rep.conditions[0].lhs == 80000.0);
  REQUIRE(rep.conditions[0].rhs == 160.0);
  REQUIRE(rep.conditions[1].lhs == 80.0);
  REQUIRE(rep.conditions[1].rhs == 16.0);
  REQUIRE(rep.conditions[2].lhs == 400.0);
  REQUIRE(rep.conditions[2].rhs == 4.0);
  REQUIRE(rep.overall);

  SystemConfig bad = cfg;
  bad.blocks = 1;
  bad.active_antennas = 2;
  const IdentReport rep_bad = check_identifiability(bad);
  REQUIRE_FALSE(rep_bad.overall);
  REQUIRE_FALSE(rep_bad.conditions[1].satisfied);  // IM = 2 < 16

  SystemConfig p2;
  p2.active_antennas = 4;
  p2.total_ports = 6;
  p2.ris_elements = 4;
  p2.users = 2;
  p2.blocks = 8;
  p2.symbols_per_block = 20;
  p2.protocol = Protocol::P2;
  const IdentReport rep2 = check_identifiability(p2);
  REQUIRE(rep2.conditions.size() == 2);
  REQUIRE(rep2.conditions[0].lhs == 640.0);
  REQUIRE(rep2.conditions[0].rhs == 24.0);
  REQUIRE(rep2.conditions[1].lhs == 32.0);
  REQUIRE(rep2.conditions[1].rhs == 2.0);
  REQUIRE(rep2.overall);
}

TEST_CASE("identifiability is monotone in I, M, T, P", "[metrics]") {
  Rng rng(29);
  for (int t = 0; t < 50; ++t) {
    SystemConfig cfg;
    cfg.active_antennas = 1 + static_cast<int>(rng.bounded(6));
    cfg.total_ports = cfg.active_antennas + static_cast<int>(rng.bounded(4));
    cfg.ris_elements = 1 + static_cast<int>(rng.bounded(16));
    cfg.users = 1 + static_cast<int>(rng.bounded(6));
    cfg.blocks = 1 + static_cast<int>(rng.bounded(8));
    cfg.slots = 1 + static_cast<int>(rng.bounded(6));
    cfg.symbols_per_block = 1 + static_cast<int>(rng.bounded(50));
    cfg.protocol = rng.bounded(2) ? Protocol::P1 : Protocol::P2;
    const IdentReport base = check_identifiability(cfg);

    for (int field = 0; field < 4; ++field) {
      SystemConfig grown = cfg;
      switch (field) {
        case 0: grown.blocks += 1 + static_cast<int>(rng.bounded(4)); break;
        case 1: grown.active_antennas += 1 + static_cast<int>(rng.bounded(4)); break;
        case 2: grown.symbols_per_block += 1 + static_cast<int>(rng.bounded(40)); break;
        case 3: grown.slots += 1 + static_cast<int>(rng.bounded(4)); break;
      }
      const IdentReport after = check_identifiability(grown);
      for (std::size_t c = 0; c < base.conditions.size(); ++c)
        if (base.conditions[c].satisfied) REQUIRE(after.conditions[c].satisfied);
    }
  }
}

TEST_CASE("complexity estimates match hand arithmetic and dominance", "[metrics]") {
  SystemConfig cfg;
  cfg.active_antennas = 8;
  cfg.total_ports = 10;
  cfg.ris_elements = 16;
  cfg.users = 4;
  cfg.blocks = 10;
  cfg.slots = 5;
  cfg.symbols_per_block = 200;
  const auto [p1, p2] = complexity_estimate(cfg);
  REQUIRE(p1 == 2375686400.0);
  REQUIRE(p2 == 475137280.0);

  // Doubling P doubles the Protocol 1 figure (both terms are linear in P).
  SystemConfig doubled = cfg;
  doubled.slots *= 2;
  REQUIRE(complexity_estimate(doubled).first == 2.0 * p1);

  Rng rng(31);
  for (int t = 0; t < 50; ++t) {
    SystemConfig c;
    c.active_antennas = 1 + static_cast<int>(rng.bounded(8));
    c.total_ports = c.active_antennas;
    c.ris_elements = 1 + static_cast<int>(rng.bounded(16));
    c.users = 1 + static_cast<int>(rng.bounded(8));
    c.blocks = 1 + static_cast<int>(rng.bounded(16));
    c.slots = 1 + static_cast<int>(rng.bounded(8));
    c.symbols_per_block = 1 + static_cast<int>(rng.bounded(100));
    const auto [a, b] = complexity_estimate(c);
    REQUIRE(b <= a);
  }
}

TEST_CASE("metric rows serialize with the documented header", "[metrics]") {
  REQUIRE(csv_header() == "snr_db,trial,protocol,nmse_db,ber,ser,iters,converged");
  MetricRecord r;
  r.snr_db = 10.0;
  r.trial = 3;
  r.protocol = Protocol::P2;
  r.nmse_eff = 1e-3;
  r.nmse_eff_db = to_db(r.nmse_eff);
  r.ber = 0.25;
  r.ser = 0.5;
  r.iterations = 42;
  r.converged = true;
  REQUIRE(csv_row(r) == "10,3,2,-30,0.25,0.5,42,1");

  MetricRecord nan_row;  // baselines leave inapplicable fields as NaN
  nan_row.snr_db = -2.5;
  const std::string s = csv_row(nan_row);
  REQUIRE(s.substr(0, 5) == "-2.5,");
  REQUIRE(s.find("nan") != std::string::npos);
}
