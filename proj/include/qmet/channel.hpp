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

#include <cstdint>
#include <string>
#include <vector>

#include "qmet/core.hpp"
#include "qmet/errors.hpp"

namespace qmet {

// A channel between two n-level systems (source A, target B) with a
// dc-dimensional ancilla C.  It is stored as the amplitude tensor of the
// underlying isometry: starting from |p, b1, c1>, the joint unitary produces
//
//     |p, b1, c1>  ->  sum_{k,l} |k>_A |l>_B |c^p_kl>_C ,
//
// so the channel is fully described by the n*n*dc complex amplitudes per
// source index p.  Columns psi_p (the flattened c^p) of an admissible channel
// are orthonormal: sum_{k,l} <c^p_kl | c^r_kl> = delta_pr.
//
// Index conventions, used consistently everywhere:
//   p  source (A) basis index of the input state,
//   k  A basis index after the interaction,
//   l  B basis index after the interaction,
//   m  ancilla (C) component.
// Public accessors take 1-based indices to match the file formats and the
// printed reports; idx()/at0() are the 0-based raw layout used by solvers.
struct ChannelSpec {
  int n = 0;
  int dc = 1;
  std::vector<Cx> c;  // layout: (((p*n + k)*n + l)*dc + m)

  static ChannelSpec zeros(int n, int dc) {
    if (n < 2) throw OutOfRange("channel requires n >= 2");
    if (dc < 1) throw OutOfRange("channel requires dc >= 1");
    ChannelSpec ch;
    ch.n = n;
    ch.dc = dc;
    ch.c.assign(static_cast<std::size_t>(n) * n * n * dc, Cx(0.0, 0.0));
    return ch;
  }

  int column_dim() const { return n * n * dc; }
  int size() const { return n * column_dim(); }

  int idx(int p, int k, int l, int m) const { return ((p * n + k) * n + l) * dc + m; }

  Cx at0(int p, int k, int l, int m) const { return c[idx(p, k, l, m)]; }
  Cx& at0(int p, int k, int l, int m) { return c[idx(p, k, l, m)]; }

  // 1-based, bounds-checked.
  Cx at(int p, int k, int l, int m = 1) const {
    check_index(p, k, l, m);
    return at0(p - 1, k - 1, l - 1, m - 1);
  }
  Cx& at(int p, int k, int l, int m = 1) {
    check_index(p, k, l, m);
    return at0(p - 1, k - 1, l - 1, m - 1);
  }

  // Flattened column psi_p, 1-based p.
  Eigen::Map<const ComplexVector> column(int p) const {
    if (p < 1 || p > n) throw OutOfRange("column index out of range");
    return Eigen::Map<const ComplexVector>(c.data() + static_cast<std::size_t>(p - 1) * column_dim(),
                                           column_dim());
  }

 private:
  void check_index(int p, int k, int l, int m) const {
    if (p < 1 || p > n || k < 1 || k > n || l < 1 || l > n || m < 1 || m > dc)
      throw OutOfRange("channel amplitude index out of range");
  }
};

struct IsometryReport {
  double max_offdiag = 0.0;   // max |<psi_p|psi_r>|, p != r
  double max_diag_dev = 0.0;  // max ||psi_p|^2 - 1|
  double residual() const { return std::max(max_offdiag, max_diag_dev); }
  bool ok(double tol = kIsometryTol) const { return residual() <= tol; }
};

inline IsometryReport check_isometry(const ChannelSpec& ch) {
  if (ch.n < 2 || ch.dc < 1) throw ShapeMismatch("channel has invalid dimensions");
  if (static_cast<int>(ch.c.size()) != ch.size())
    throw ShapeMismatch("channel amplitude storage has wrong size");
  IsometryReport rep;
  for (int p = 1; p <= ch.n; ++p) {
    for (int r = p; r <= ch.n; ++r) {
      const Cx overlap = ch.column(p).dot(ch.column(r));  // conjugates the left factor
      if (p == r)
        rep.max_diag_dev = std::max(rep.max_diag_dev, std::abs(overlap - Cx(1.0, 0.0)));
      else
        rep.max_offdiag = std::max(rep.max_offdiag, std::abs(overlap));
    }
  }
  return rep;
}

// |p, b1, c1> -> |p, b1, c1>: the channel that does nothing.  c^p_kl is
// delta_kp delta_l1 times the fixed ancilla state.
inline ChannelSpec identity_channel(int n) {
  ChannelSpec ch = ChannelSpec::zeros(n, 1);
  for (int p = 1; p <= n; ++p) ch.at(p, p, 1) = Cx(1.0, 0.0);
  return ch;
}

// |p, b1, c1> -> |1, p, c1>: moves the source state wholesale onto the target.
inline ChannelSpec swap_channel(int n) {
  ChannelSpec ch = ChannelSpec::zeros(n, 1);
  for (int p = 1; p <= n; ++p) ch.at(p, 1, p) = Cx(1.0, 0.0);
  return ch;
}

// Random admissible channel: n i.i.d. complex Gaussian columns in C^(n^2 dc),
// orthonormalized by two rounds of Gram-Schmidt.  Deterministic per seed.
inline ChannelSpec random_isometry_channel(int n, int dc, std::uint64_t seed) {
  ChannelSpec ch = ChannelSpec::zeros(n, dc);
  const int d = ch.column_dim();
  Rng rng(seed);
  for (int attempt = 0; attempt < 8; ++attempt) {
    ComplexMatrix cols(d, n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < d; ++i) cols(i, j) = rng.complex_gaussian();
    bool degenerate = false;
    for (int pass = 0; pass < 2 && !degenerate; ++pass) {
      for (int j = 0; j < n; ++j) {
        for (int i = 0; i < j; ++i) cols.col(j) -= cols.col(i).dot(cols.col(j)) * cols.col(i);
        const double nrm = cols.col(j).norm();
        if (nrm < 1e-8) {
          degenerate = true;
          break;
        }
        cols.col(j) /= nrm;
      }
    }
    if (degenerate) continue;
    for (int p = 0; p < n; ++p)
      for (int i = 0; i < d; ++i) ch.c[static_cast<std::size_t>(p) * d + i] = cols(i, p);
    return ch;
  }
  throw DegenerateDraw("random isometry draw failed 8 times");
}

namespace detail {

// Memory matrix for the ordered pair (r, p):
//   (Theta_rp)_{k,nn} = sum_{l,m} conj(c[r][nn][l][m]) * c[p][k][l][m].
// The final source state is lam~ = sum_{p,r} lam_pr Theta_rp.  Indices here
// are 1-based like the public API.
inline ComplexMatrix theta_matrix(const ChannelSpec& ch, int r, int p) {
  const int n = ch.n, dc = ch.dc;
  ComplexMatrix th = ComplexMatrix::Zero(n, n);
  for (int k = 0; k < n; ++k)
    for (int nn = 0; nn < n; ++nn) {
      Cx s(0.0, 0.0);
      for (int l = 0; l < n; ++l)
        for (int m = 0; m < dc; ++m)
          s += std::conj(ch.at0(r - 1, nn, l, m)) * ch.at0(p - 1, k, l, m);
      th(k, nn) = s;
    }
  return th;
}

// Final states without any validity checks; linear in lam.  Used by the
// finite-difference probes, which feed non-density perturbations through.
inline ComplexMatrix apply_to_source_raw(const ChannelSpec& ch, const ComplexMatrix& lam) {
  const int n = ch.n;
  ComplexMatrix out = ComplexMatrix::Zero(n, n);
  for (int p = 1; p <= n; ++p)
    for (int r = 1; r <= n; ++r) out += lam(p - 1, r - 1) * theta_matrix(ch, r, p);
  return out;
}

inline ComplexMatrix apply_to_target_raw(const ChannelSpec& ch, const ComplexMatrix& lam) {
  const int n = ch.n, dc = ch.dc;
  ComplexMatrix out = ComplexMatrix::Zero(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      Cx s(0.0, 0.0);
      for (int p = 0; p < n; ++p)
        for (int r = 0; r < n; ++r) {
          Cx tel(0.0, 0.0);
          for (int k = 0; k < n; ++k)
            for (int m = 0; m < dc; ++m)
              tel += std::conj(ch.at0(r, k, b, m)) * ch.at0(p, k, a, m);
          s += lam(p, r) * tel;
        }
      out(a, b) = s;
    }
  return out;
}

}  // namespace detail

struct ChannelOutput {
  DensityMatrix source_final;  // lam~, what A retains
  DensityMatrix target_final;  // r~, what B receives
};

inline ChannelOutput apply_channel(const ChannelSpec& ch, const DensityMatrix& lam) {
  if (lam.dim() != ch.n)
    throw DimensionMismatch("state dimension " + std::to_string(lam.dim()) +
                            " does not match channel n = " + std::to_string(ch.n));
  const IsometryReport rep = check_isometry(ch);
  if (!rep.ok())
    throw InvalidChannel("channel is not an isometry (residual = " +
                         std::to_string(rep.residual()) + ")");
  ComplexMatrix a = detail::apply_to_source_raw(ch, lam.mat);
  ComplexMatrix b = detail::apply_to_target_raw(ch, lam.mat);
  a = ((a + a.adjoint()) / 2.0).eval();
  b = ((b + b.adjoint()) / 2.0).eval();
  return ChannelOutput{validate_density(a), validate_density(b)};
}

// Reduced-dynamics coefficients for the target:  r~_ab = sum_{p,r} lam_pr *
// t(a,b,p,r),  with  t(a,b,p,r) = sum_k <c^r_kb | c^p_ka>.  They obey
// conj(t(a,b,p,r)) == t(b,a,r,p), which keeps r~ Hermitian.
struct TransferTensor {
  int n = 0;
  std::vector<Cx> t;  // ((a*n + b)*n + p)*n + r, 0-based

  // 1-based.
  Cx at(int a, int b, int p, int r) const {
    if (a < 1 || a > n || b < 1 || b > n || p < 1 || p > n || r < 1 || r > n)
      throw OutOfRange("transfer tensor index out of range");
    return t[static_cast<std::size_t>((((a - 1) * n + (b - 1)) * n + (p - 1)) * n + (r - 1))];
  }
};

inline TransferTensor transfer_tensor(const ChannelSpec& ch) {
  const int n = ch.n, dc = ch.dc;
  TransferTensor tt;
  tt.n = n;
  tt.t.assign(static_cast<std::size_t>(n) * n * n * n, Cx(0.0, 0.0));
  std::size_t w = 0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int p = 0; p < n; ++p)
        for (int r = 0; r < n; ++r) {
          Cx s(0.0, 0.0);
          for (int k = 0; k < n; ++k)
            for (int m = 0; m < dc; ++m) s += std::conj(ch.at0(r, k, b, m)) * ch.at0(p, k, a, m);
          tt.t[w++] = s;
        }
  return tt;
}

inline ComplexMatrix apply_transfer_tensor(const TransferTensor& tt, const ComplexMatrix& lam) {
  if (lam.rows() != tt.n || lam.cols() != tt.n)
    throw DimensionMismatch("state dimension does not match transfer tensor");
  ComplexMatrix out = ComplexMatrix::Zero(tt.n, tt.n);
  for (int a = 1; a <= tt.n; ++a)
    for (int b = 1; b <= tt.n; ++b) {
      Cx s(0.0, 0.0);
      for (int p = 1; p <= tt.n; ++p)
        for (int r = 1; r <= tt.n; ++r) s += lam(p - 1, r - 1) * tt.at(a, b, p, r);
      out(a - 1, b - 1) = s;
    }
  return out;
}

enum class Side { A, B };

// Kraus decomposition of the reduced dynamics on one side.  Side A operators
// are indexed by the traced-out (l, m); side B by (k, m).  Completeness
// sum_j K_j^H K_j = I holds exactly when the channel is an isometry.
// Operators with negligible norm (<= 1e-14) are dropped, so e.g. the identity
// channel yields a single identity operator.
inline std::vector<ComplexMatrix> kraus_operators(const ChannelSpec& ch, Side side) {
  const IsometryReport rep = check_isometry(ch);
  if (!rep.ok())
    throw InvalidChannel("channel is not an isometry (residual = " +
                         std::to_string(rep.residual()) + ")");
  const int n = ch.n, dc = ch.dc;
  std::vector<ComplexMatrix> ops;
  ops.reserve(static_cast<std::size_t>(n) * dc);
  for (int tr = 0; tr < n; ++tr)
    for (int m = 0; m < dc; ++m) {
      ComplexMatrix k(n, n);
      for (int row = 0; row < n; ++row)
        for (int p = 0; p < n; ++p)
          k(row, p) = (side == Side::A) ? ch.at0(p, row, tr, m)   // tr plays l
                                        : ch.at0(p, tr, row, m);  // tr plays k
      if (k.norm() > 1e-14) ops.push_back(std::move(k));
    }
  return ops;
}

}  // namespace qmet
