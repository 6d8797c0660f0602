// SPDX-License-Identifier: Apache-2.0
#pragma once

// Brute-force reference implementations used only for verification: scalar
// index loops that evaluate the signal equations and the least-squares
// regression maps term by term, with no shared code with the fast paths.
// Intended for tiny dimensions.

#include <vector>

#include <risfa/matrix.hpp>

namespace risfa::testing {

/// Protocol 1 received tensor by explicit summation:
/// y[(i,m), t, p] = sum_n sum_nr sum_k S_i(m,n) H(n,nr) theta(i,nr) G(nr,k) C(p,k) X(k,t).
inline CTensor3 naive_synth_p1(const std::vector<CMatrix>& selections, const CMatrix& h,
                               const CMatrix& theta, const CMatrix& g, const CMatrix& coding,
                               const CMatrix& x) {
  const auto blocks = static_cast<Eigen::Index>(selections.size());
  const auto m = selections.front().rows();
  const auto n = selections.front().cols();
  const auto nr = h.cols();
  const auto k = g.cols();
  const auto slots = coding.rows();
  const auto t_len = x.cols();
  std::vector<CMatrix> slices(static_cast<std::size_t>(slots), CMatrix::Zero(blocks * m, t_len));
  for (Eigen::Index p = 0; p < slots; ++p)
    for (Eigen::Index i = 0; i < blocks; ++i)
      for (Eigen::Index mm = 0; mm < m; ++mm)
        for (Eigen::Index t = 0; t < t_len; ++t) {
          cxd acc(0, 0);
          for (Eigen::Index nn = 0; nn < n; ++nn)
            for (Eigen::Index r = 0; r < nr; ++r)
              for (Eigen::Index u = 0; u < k; ++u)
                acc += selections[static_cast<std::size_t>(i)](mm, nn) * h(nn, r) * theta(i, r) *
                       g(r, u) * coding(p, u) * x(u, t);
          slices[static_cast<std::size_t>(p)](i * m + mm, t) = acc;
        }
  return CTensor3(std::move(slices));
}

/// Protocol 2 received tensor by explicit summation:
/// y[m, t, i] = sum_n sum_nr sum_k S_i(m,n) H(n,nr) theta(i,nr) G(nr,k) C(i,k) X(k,t).
inline CTensor3 naive_synth_p2(const std::vector<CMatrix>& selections, const CMatrix& h,
                               const CMatrix& theta, const CMatrix& g, const CMatrix& coding,
                               const CMatrix& x) {
  const auto blocks = static_cast<Eigen::Index>(selections.size());
  const auto m = selections.front().rows();
  const auto n = selections.front().cols();
  const auto nr = h.cols();
  const auto k = g.cols();
  const auto t_len = x.cols();
  std::vector<CMatrix> slices(static_cast<std::size_t>(blocks), CMatrix::Zero(m, t_len));
  for (Eigen::Index i = 0; i < blocks; ++i)
    for (Eigen::Index mm = 0; mm < m; ++mm)
      for (Eigen::Index t = 0; t < t_len; ++t) {
        cxd acc(0, 0);
        for (Eigen::Index nn = 0; nn < n; ++nn)
          for (Eigen::Index r = 0; r < nr; ++r)
            for (Eigen::Index u = 0; u < k; ++u)
              acc += selections[static_cast<std::size_t>(i)](mm, nn) * h(nn, r) * theta(i, r) *
                     g(r, u) * coding(i, u) * x(u, t);
        slices[static_cast<std::size_t>(i)](mm, t) = acc;
      }
  return CTensor3(std::move(slices));
}

// --- observation vector assemblies by explicit index arithmetic ------------

/// Protocol 1 vectorized data for the G update: slices in order, each
/// column-major. Entry ((p * T + t) * IM + r).
inline CVector naive_pf_yg(const CTensor3& y) {
  const auto im = y.dim1(), t_len = y.dim2(), slots = y.dim3();
  CVector out(im * t_len * slots);
  for (Eigen::Index p = 0; p < slots; ++p)
    for (Eigen::Index t = 0; t < t_len; ++t)
      for (Eigen::Index r = 0; r < im; ++r)
        out(p * t_len * im + t * im + r) = y.slice(p)(r, t);
  return out;
}

/// Protocol 1 vectorized data for the H update: per block, the slot-wise
/// horizontal concatenation [Y_{i,1} ... Y_{i,P}] is vectorized column-major.
inline CVector naive_pf_yh(const CTensor3& y, Eigen::Index blocks) {
  const auto im = y.dim1(), t_len = y.dim2(), slots = y.dim3();
  const auto m = im / blocks;
  CVector out(im * t_len * slots);
  Eigen::Index pos = 0;
  for (Eigen::Index i = 0; i < blocks; ++i)
    for (Eigen::Index p = 0; p < slots; ++p)
      for (Eigen::Index t = 0; t < t_len; ++t)
        for (Eigen::Index mm = 0; mm < m; ++mm) out(pos++) = y.slice(p)(i * m + mm, t);
  return out;
}

/// Vertical stack of the frontal slices (both protocols' symbol update).
inline CMatrix naive_stacked(const CTensor3& y) {
  CMatrix out(y.dim1() * y.dim3(), y.dim2());
  for (Eigen::Index s = 0; s < y.dim3(); ++s)
    out.middleRows(s * y.dim1(), y.dim1()) = y.slice(s);
  return out;
}

/// Protocol 2 vectorized data (shared by the G and H updates): slices in
/// order, each column-major.
inline CVector naive_npf_y(const CTensor3& y) {
  const auto m = y.dim1(), t_len = y.dim2(), blocks = y.dim3();
  CVector out(m * t_len * blocks);
  for (Eigen::Index i = 0; i < blocks; ++i)
    for (Eigen::Index t = 0; t < t_len; ++t)
      for (Eigen::Index mm = 0; mm < m; ++mm)
        out(i * t_len * m + t * m + mm) = y.slice(i)(mm, t);
  return out;
}

// --- regression matrices built column-by-column through the scalar map -----

namespace detail {

template <typename Synth, typename Assemble>
CMatrix columns_from_unit_inputs(Eigen::Index rows, Eigen::Index cols, Eigen::Index unit_rows,
                                 Eigen::Index unit_cols, Synth&& synth, Assemble&& assemble) {
  CMatrix out(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    CMatrix unit = CMatrix::Zero(unit_rows, unit_cols);
    unit(c % unit_rows, c / unit_rows) = 1.0;  // column-major unknown ordering
    out.col(c) = assemble(synth(unit));
  }
  return out;
}

}  // namespace detail

/// Protocol 1 regression matrix for the G update, one column per unknown
/// G entry pushed through the scalar synthesis loop.
inline CMatrix naive_pf_wg(const std::vector<CMatrix>& selections, const CMatrix& h,
                           const CMatrix& theta, const CMatrix& coding, const CMatrix& x) {
  const auto blocks = static_cast<Eigen::Index>(selections.size());
  const auto m = selections.front().rows();
  const auto rows = blocks * m * x.cols() * coding.rows();
  const auto nr = h.cols();
  const auto k = x.rows();
  return detail::columns_from_unit_inputs(
      rows, nr * k, nr, k,
      [&](const CMatrix& g) { return naive_synth_p1(selections, h, theta, g, coding, x); },
      [&](const CTensor3& t) { return naive_pf_yg(t); });
}

inline CMatrix naive_pf_wh(const std::vector<CMatrix>& selections, const CMatrix& g,
                           const CMatrix& theta, const CMatrix& coding, const CMatrix& x,
                           Eigen::Index total_ports) {
  const auto blocks = static_cast<Eigen::Index>(selections.size());
  const auto m = selections.front().rows();
  const auto rows = blocks * m * x.cols() * coding.rows();
  const auto nr = g.rows();
  return detail::columns_from_unit_inputs(
      rows, total_ports * nr, total_ports, nr,
      [&](const CMatrix& h) { return naive_synth_p1(selections, h, theta, g, coding, x); },
      [&](const CTensor3& t) { return naive_pf_yh(t, blocks); });
}

inline CMatrix naive_pf_btotal(const std::vector<CMatrix>& selections, const CMatrix& h,
                               const CMatrix& theta, const CMatrix& g, const CMatrix& coding) {
  const auto blocks = static_cast<Eigen::Index>(selections.size());
  const auto m = selections.front().rows();
  const auto k = g.cols();
  CMatrix out(blocks * m * coding.rows(), k);
  for (Eigen::Index u = 0; u < k; ++u) {
    CMatrix x = CMatrix::Zero(k, 1);
    x(u, 0) = 1.0;
    out.col(u) = naive_stacked(naive_synth_p1(selections, h, theta, g, coding, x)).col(0);
  }
  return out;
}

inline CMatrix naive_npf_wg(const std::vector<CMatrix>& selections, const CMatrix& h,
                            const CMatrix& theta, const CMatrix& coding, const CMatrix& x) {
  const auto blocks = static_cast<Eigen::Index>(selections.size());
  const auto m = selections.front().rows();
  const auto rows = blocks * m * x.cols();
  const auto nr = h.cols();
  const auto k = x.rows();
  return detail::columns_from_unit_inputs(
      rows, nr * k, nr, k,
      [&](const CMatrix& g) { return naive_synth_p2(selections, h, theta, g, coding, x); },
      [&](const CTensor3& t) { return naive_npf_y(t); });
}

inline CMatrix naive_npf_wh(const std::vector<CMatrix>& selections, const CMatrix& g,
                            const CMatrix& theta, const CMatrix& coding, const CMatrix& x,
                            Eigen::Index total_ports) {
  const auto blocks = static_cast<Eigen::Index>(selections.size());
  const auto m = selections.front().rows();
  const auto rows = blocks * m * x.cols();
  const auto nr = g.rows();
  return detail::columns_from_unit_inputs(
      rows, total_ports * nr, total_ports, nr,
      [&](const CMatrix& h) { return naive_synth_p2(selections, h, theta, g, coding, x); },
      [&](const CTensor3& t) { return naive_npf_y(t); });
}

inline CMatrix naive_npf_btotal(const std::vector<CMatrix>& selections, const CMatrix& h,
                                const CMatrix& theta, const CMatrix& g, const CMatrix& coding) {
  const auto blocks = static_cast<Eigen::Index>(selections.size());
  const auto m = selections.front().rows();
  const auto k = g.cols();
  CMatrix out(blocks * m, k);
  for (Eigen::Index u = 0; u < k; ++u) {
    CMatrix x = CMatrix::Zero(k, 1);
    x(u, 0) = 1.0;
    out.col(u) = naive_stacked(naive_synth_p2(selections, h, theta, g, coding, x)).col(0);
  }
  return out;
}

}  // namespace risfa::testing
