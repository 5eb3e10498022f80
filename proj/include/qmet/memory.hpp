// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <vector>

#include "qmet/channel.hpp"
#include "qmet/core.hpp"

namespace qmet {

// All n^2 memory matrices of a channel.  theta(r, p) is the coefficient of
// the source element lam_pr in the final source state:
//
//     lam~ = sum_{p,r} lam_pr * theta(r, p),
//
// so || theta(r, p) || measures how much the source still remembers about
// lam_pr after the transfer.  Note || theta(a, c) || == || theta(c, a) ||
// identically (the two matrices are adjoints of each other), so the memory
// about an element and about its conjugate always agree.
struct ThetaTensor {
  int n = 0;
  std::vector<ComplexMatrix> mats;  // (r-1)*n + (p-1)

  const ComplexMatrix& at(int r, int p) const {
    if (r < 1 || r > n || p < 1 || p > n) throw OutOfRange("theta index out of range");
    return mats[static_cast<std::size_t>(r - 1) * n + (p - 1)];
  }
};

inline ThetaTensor theta_tensor(const ChannelSpec& ch) {
  ThetaTensor th;
  th.n = ch.n;
  th.mats.reserve(static_cast<std::size_t>(ch.n) * ch.n);
  for (int r = 1; r <= ch.n; ++r)
    for (int p = 1; p <= ch.n; ++p) th.mats.push_back(detail::theta_matrix(ch, r, p));
  return th;
}

inline ComplexMatrix reconstruct_source_final(const ThetaTensor& th, const ComplexMatrix& lam) {
  if (lam.rows() != th.n || lam.cols() != th.n)
    throw DimensionMismatch("state dimension does not match theta tensor");
  ComplexMatrix out = ComplexMatrix::Zero(th.n, th.n);
  for (int p = 1; p <= th.n; ++p)
    for (int r = 1; r <= th.n; ++r) out += lam(p - 1, r - 1) * th.at(r, p);
  return out;
}

// Frobenius norms of all memory matrices, plus the pairwise differences of
// the diagonal ones.  entry(a, c) = ||theta(a, c)||; diagonal memory about
// lam_aa versus lam_bb is only jointly eliminable when theta(a,a) == theta(b,b),
// which diag_difference(a, b) measures.
struct MemoryTable {
  int n = 0;
  RealMatrix norms;      // (a-1, c-1) -> ||theta(a, c)||
  RealMatrix diag_diff;  // (a-1, b-1) -> ||theta(a,a) - theta(b,b)||, symmetric

  double entry(int a, int c) const {
    if (a < 1 || a > n || c < 1 || c > n) throw OutOfRange("memory table index out of range");
    return norms(a - 1, c - 1);
  }
  double diag_difference(int a, int b) const {
    if (a < 1 || a > n || b < 1 || b > n) throw OutOfRange("memory table index out of range");
    return diag_diff(a - 1, b - 1);
  }
  double max_offdiag() const {
    double v = 0.0;
    for (int a = 0; a < n; ++a)
      for (int c = 0; c < n; ++c)
        if (a != c) v = std::max(v, norms(a, c));
    return v;
  }
};

inline MemoryTable memory_table_from_theta(const ThetaTensor& th) {
  MemoryTable mt;
  mt.n = th.n;
  mt.norms = RealMatrix::Zero(th.n, th.n);
  mt.diag_diff = RealMatrix::Zero(th.n, th.n);
  for (int a = 1; a <= th.n; ++a)
    for (int c = 1; c <= th.n; ++c) mt.norms(a - 1, c - 1) = frobenius_norm(th.at(a, c));
  for (int a = 1; a <= th.n; ++a)
    for (int b = 1; b <= th.n; ++b)
      mt.diag_diff(a - 1, b - 1) = frobenius_norm(th.at(a, a) - th.at(b, b));
  return mt;
}

inline MemoryTable memory_table(const ChannelSpec& ch) {
  return memory_table_from_theta(theta_tensor(ch));
}

// Finite-difference probe of d(lam~)/d(lam_ac) in the Wirtinger sense
// (1/2)(d/dRe - i d/dIm), taken at the maximally mixed state.  The map is
// linear, so the base point is irrelevant; this is an independent oracle for
// theta(c, a).  Central differences, four raw applications per call.
inline ComplexMatrix wirtinger_fd(const ChannelSpec& ch, int a, int c, double h = 1e-5) {
  if (!(h >= kMinFdStep)) throw StepTooSmall("finite-difference step must be >= 1e-12");
  if (a < 1 || a > ch.n || c < 1 || c > ch.n)
    throw OutOfRange("element index out of range");
  const IsometryReport rep = check_isometry(ch);
  if (!rep.ok())
    throw InvalidChannel("channel is not an isometry (residual = " +
                         std::to_string(rep.residual()) + ")");
  const int n = ch.n;
  const ComplexMatrix base = ComplexMatrix::Identity(n, n) / static_cast<double>(n);
  ComplexMatrix e = ComplexMatrix::Zero(n, n);

  e(a - 1, c - 1) = Cx(h, 0.0);
  const ComplexMatrix d_re = (detail::apply_to_source_raw(ch, base + e) -
                              detail::apply_to_source_raw(ch, base - e)) /
                             (2.0 * h);
  e(a - 1, c - 1) = Cx(0.0, h);
  const ComplexMatrix d_im = (detail::apply_to_source_raw(ch, base + e) -
                              detail::apply_to_source_raw(ch, base - e)) /
                             (2.0 * h);
  return (d_re - Cx(0.0, 1.0) * d_im) / 2.0;
}

// Memory about the real and imaginary parts of lam_ab separately.  Writing
// lam_ab = x + iy with lam_ba tied by Hermiticity,
//   d(lam~)/dx = theta(b,a) + theta(a,b),   d(lam~)/dy = i(theta(b,a) - theta(a,b)),
// and the factor 1/2 keeps the ideal-transfer normalization at 1.
inline double real_part_memory(const ThetaTensor& th, int a, int b) {
  return 0.5 * frobenius_norm(th.at(b, a) + th.at(a, b));
}

inline double imag_part_memory(const ThetaTensor& th, int a, int b) {
  return 0.5 * frobenius_norm(th.at(b, a) - th.at(a, b));
}

}  // namespace qmet
