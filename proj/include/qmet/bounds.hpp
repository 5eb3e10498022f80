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

#include <optional>
#include <sstream>
#include <vector>

#include "qmet/constraints.hpp"
#include "qmet/memory.hpp"

namespace qmet {

// Certified ceilings on retained memory under damped diagonal transfer.
// With r~_aa = eps_a lam_aa and r~_bb = eps_b lam_bb enforced for all inputs:
//   memory about lam_ab (both indices transferred)  <= sqrt((1-eps_a)(1-eps_b)),
//   memory about lam_ac (c not transferred)         <= sqrt(1-eps_a),
// and under r~_ab = eps lam_ab with no ancilla (dc = 1):
//   memory about lam_ab                              <= sqrt(1-eps^2).
// All three are tight; build_saturating_* construct channels that reach them.

inline double bound_diagonal(double eps_a, double eps_b) {
  if (!(eps_a > 0.0 && eps_a <= 1.0) || !(eps_b > 0.0 && eps_b <= 1.0))
    throw OutOfRange("bound_diagonal requires eps in (0, 1]");
  return std::sqrt((1.0 - eps_a) * (1.0 - eps_b));
}

inline double bound_diagonal_other(double eps_a) {
  if (!(eps_a >= 0.0 && eps_a <= 1.0)) throw OutOfRange("bound_diagonal_other requires eps in [0, 1]");
  return std::sqrt(1.0 - eps_a);
}

inline double bound_nondiagonal(double eps) {
  if (!(eps >= 0.0 && eps <= 1.0)) throw OutOfRange("bound_nondiagonal requires eps in [0, 1]");
  return std::sqrt((1.0 - eps) * (1.0 + eps));
}

// Channel saturating the diagonal bounds, dc = 1, n >= 3.  Source 1 keeps
// amplitude sqrt(eps_1) on its own slot and spills sqrt(1-eps_1) into target
// column 3; source 2 likewise; everything else passes through disjoint slots.
// Satisfies DiagonalNonIdeal{(1,eps_1),(2,eps_2)} exactly, with
//   ||theta(1,2)|| = sqrt((1-eps_1)(1-eps_2)),
//   ||theta(1,3)|| = sqrt(1-eps_1),  ||theta(2,3)|| = sqrt(1-eps_2).
inline ChannelSpec build_saturating_diagonal(int n, double eps_1, double eps_2) {
  if (n < 3) throw OutOfRange("saturating diagonal channel requires n >= 3");
  if (!(eps_1 > 0.0 && eps_1 < 1.0) || !(eps_2 > 0.0 && eps_2 < 1.0))
    throw OutOfRange("saturating diagonal channel requires eps in (0, 1)");
  ChannelSpec ch = ChannelSpec::zeros(n, 1);
  ch.at(1, 1, 1) = Cx(std::sqrt(eps_1), 0.0);
  ch.at(1, 1, 3) = Cx(std::sqrt(1.0 - eps_1), 0.0);
  ch.at(2, 2, 2) = Cx(std::sqrt(eps_2), 0.0);
  ch.at(2, 2, 3) = Cx(std::sqrt(1.0 - eps_2), 0.0);
  for (int p = 3; p <= n; ++p) ch.at(p, p, p) = Cx(1.0, 0.0);
  return ch;
}

// Channel saturating the dc = 1 non-diagonal bound, n >= 2.  Satisfies
// NondiagonalNonIdeal{1,2,eps} exactly with ||theta(1,2)|| = sqrt(1-eps^2).
inline ChannelSpec build_saturating_nondiagonal(int n, double eps) {
  if (n < 2) throw OutOfRange("saturating nondiagonal channel requires n >= 2");
  if (!(eps > 0.0 && eps < 1.0))
    throw OutOfRange("saturating nondiagonal channel requires eps in (0, 1)");
  ChannelSpec ch = ChannelSpec::zeros(n, 1);
  ch.at(1, 1, 1) = Cx(1.0, 0.0);
  ch.at(2, 2, 1) = Cx(std::sqrt(1.0 - eps * eps), 0.0);
  ch.at(2, 1, 2) = Cx(eps, 0.0);
  for (int p = 3; p <= n; ++p) ch.at(p, p, p) = Cx(1.0, 0.0);
  return ch;
}

// The tight ceiling for ||theta(a, c)||, a != c, when the theory states one
// for this constraint kind / pair / ancilla dimension.  nullopt means "no
// closed form claimed" (the universal ||theta|| <= 1 still applies and is
// checked elsewhere).
inline std::optional<double> closed_form_bound(const TransferConstraint& tc, int a, int c,
                                               int dc) {
  if (a < 1 || a > tc.n || c < 1 || c > tc.n) throw OutOfRange("element index out of range");
  if (a == c) return std::nullopt;

  if (const auto* k = std::get_if<DiagonalIdeal>(&tc.kind)) {
    if (a == k->a || c == k->a) return 0.0;
    return std::nullopt;
  }
  if (const auto* k = std::get_if<DiagonalNonIdeal>(&tc.kind)) {
    auto eps_of = [&](int u) -> std::optional<double> {
      for (const auto& [v, eps] : k->pairs)
        if (v == u) return eps;
      return std::nullopt;
    };
    const auto ea = eps_of(a), ec = eps_of(c);
    if (ea && ec) return bound_diagonal(*ea, *ec);
    if (ea) return bound_diagonal_other(*ea);
    if (ec) return bound_diagonal_other(*ec);
    return std::nullopt;
  }
  if (const auto* k = std::get_if<NondiagonalIdeal>(&tc.kind)) {
    if ((a == k->a && c == k->b) || (a == k->b && c == k->a)) return 0.0;
    return std::nullopt;
  }
  if (const auto* k = std::get_if<NondiagonalNonIdeal>(&tc.kind)) {
    if (dc == 1 && ((a == k->a && c == k->b) || (a == k->b && c == k->a)))
      return bound_nondiagonal(k->eps);
    return std::nullopt;
  }
  if (const auto* k = std::get_if<TwoStateDiagonal>(&tc.kind)) {
    // The two-state elimination theorem: n = 2, both states valid and tied by
    // the cross relation with distinct diagonals.  Checked by the scenario
    // layer; here only the structural applicability.
    if (tc.n == 2 && ((a == 1 && c == 2) || (a == 2 && c == 1))) {
      const Cx lhs = k->rho.mat(0, 0) * k->chi.mat(0, 1);
      const Cx rhs = k->chi.mat(0, 0) * k->rho.mat(0, 1);
      const bool cross = std::abs(lhs - rhs) <= 1e-12;
      const bool distinct = std::abs(k->rho.mat(0, 0) - k->chi.mat(0, 0)) > 1e-9;
      if (cross && distinct) return 0.0;
    }
    return std::nullopt;
  }
  return std::nullopt;  // RealPartIdeal: no hard ceiling claimed
}

struct BoundReport {
  int a = 0, c = 0;
  double theoretical = 0.0;
  double achieved = 0.0;
  double slack = 0.0;  // theoretical - achieved; admissible channels keep this >= -1e-8
};

// One row per unordered pair with a closed-form ceiling.  The channel is
// assumed admissible for tc (callers check); achieved values come straight
// from the memory table.
inline std::vector<BoundReport> bound_reports(const ChannelSpec& ch,
                                              const TransferConstraint& tc) {
  const MemoryTable mt = memory_table(ch);
  std::vector<BoundReport> rows;
  for (int a = 1; a <= tc.n; ++a)
    for (int c = a + 1; c <= tc.n; ++c)
      if (const auto bound = closed_form_bound(tc, a, c, ch.dc)) {
        const double ach = mt.entry(a, c);
        rows.push_back({a, c, *bound, ach, *bound - ach});
      }
  return rows;
}

namespace detail {
inline std::string dump_channel(const ChannelSpec& ch) {
  std::ostringstream os;
  os << "channel n=" << ch.n << " dc=" << ch.dc << " amplitudes:";
  for (int p = 1; p <= ch.n; ++p)
    for (int k = 1; k <= ch.n; ++k)
      for (int l = 1; l <= ch.n; ++l)
        for (int m = 1; m <= ch.dc; ++m) {
          const Cx v = ch.at(p, k, l, m);
          if (std::abs(v) > 1e-14)
            os << " c[" << p << "][" << k << "][" << l << "][" << m << "]=(" << v.real() << ","
               << v.imag() << ")";
        }
  return os.str();
}
}  // namespace detail

// Hard invariant: an admissible channel may never exceed a certified ceiling
// by more than the slack tolerance.  Refuses to certify channels that do not
// actually satisfy the constraint (that would vacuously pass everything).
inline void assert_no_bound_violation(const ChannelSpec& ch, const TransferConstraint& tc) {
  const double con = check_constraint(ch, tc);
  const IsometryReport iso = check_isometry(ch);
  if (!iso.ok() || con > kResidualTol)
    throw InvalidChannel("bound check requires an admissible channel (isometry residual " +
                         std::to_string(iso.residual()) + ", constraint residual " +
                         std::to_string(con) + ")");
  for (const BoundReport& row : bound_reports(ch, tc))
    if (row.slack < -kBoundSlack)
      throw BoundViolation("memory " + std::to_string(row.achieved) + " for pair (" +
                               std::to_string(row.a) + "," + std::to_string(row.c) +
                               ") exceeds certified bound " + std::to_string(row.theoretical) +
                               "; " + detail::dump_channel(ch),
                           row.theoretical, row.achieved);
}

// --- inequality-chain diagnostics (dc = 1, non-diagonal damping) -----------------

// Numerical audit of the derivation behind bound_nondiagonal.  With
// w(u, v) = sum_k |c^u_kv|^2 and the column overlaps
//   alpha_ls = sum_k conj(c^a_kl) c^a_ks,   beta_ls = sum_k c^b_kl conj(c^b_ks),
// one has, for a channel satisfying r~_ab = eps lam_ab (all inputs, dc = 1):
//
//   ||theta(a,b)||^2 = w_aa w_ba + w_ab w_bb + cross            (exact identity;
//        cross = sum over (l,s) outside {a,b}^2 of alpha_ls beta_ls, real)
//   |cross| <= sum' sqrt(w(a,l) w(a,s) w(b,l) w(b,s))           (Cauchy-Schwarz per term)
//           <= sqrt( sum' w(a,l)w(a,s) * sum' w(b,l)w(b,s) )    (Cauchy-Schwarz on the sum)
//
// and the last factor equals (1 - (w_aa + w_ab)^2)(1 - (w_ba + w_bb)^2) after
// using column normalization.  The chain members below are all computed from
// the explicit sums, so each inequality holds to roundoff; closed_form_total
// additionally evaluates the normalized expression, which can differ from the
// explicit one by O(isometry residual) near saturation.
struct ChainDiagnostics {
  double theta_sq = 0.0;
  double w_aa = 0.0, w_ab = 0.0, w_ba = 0.0, w_bb = 0.0;
  double cross = 0.0;           // real part of the cross sum
  double cross_imag = 0.0;      // |imaginary part|, tiny for admissible channels
  double identity_residual = 0.0;
  double pointwise_bound = 0.0;  // sum' of per-term Cauchy-Schwarz ceilings
  double summed_bound = 0.0;     // sqrt(product of explicit quadratic sums)
  double total = 0.0;            // w_aa w_ba + w_ab w_bb + summed_bound
  double closed_form_total = 0.0;

  bool chain_ok(double tol = kChainTol) const {
    return identity_residual <= tol && std::abs(cross) <= pointwise_bound + tol &&
           pointwise_bound <= summed_bound + tol && theta_sq <= total + tol;
  }
};

inline ChainDiagnostics chain_diagnostics(const ChannelSpec& ch, int a, int b) {
  if (ch.dc != 1) throw OutOfRange("chain diagnostics apply to dc = 1 channels only");
  if (a < 1 || a > ch.n || b < 1 || b > ch.n || a == b)
    throw OutOfRange("chain diagnostics need distinct element indices");
  const int n = ch.n;

  RealVector wa(n), wb(n);  // w(a, l), w(b, l)
  for (int l = 0; l < n; ++l) {
    double sa = 0.0, sb = 0.0;
    for (int k = 0; k < n; ++k) {
      sa += std::norm(ch.at0(a - 1, k, l, 0));
      sb += std::norm(ch.at0(b - 1, k, l, 0));
    }
    wa(l) = sa;
    wb(l) = sb;
  }

  ChainDiagnostics cd;
  cd.w_aa = wa(a - 1);
  cd.w_ab = wa(b - 1);
  cd.w_ba = wb(a - 1);
  cd.w_bb = wb(b - 1);
  cd.theta_sq = std::pow(frobenius_norm(detail::theta_matrix(ch, a, b)), 2);

  Cx cross(0.0, 0.0);
  double pointwise = 0.0, qa = 0.0, qb = 0.0;
  for (int l = 0; l < n; ++l)
    for (int s = 0; s < n; ++s) {
      const bool excluded = (l == a - 1 || l == b - 1) && (s == a - 1 || s == b - 1);
      if (excluded) continue;
      Cx alpha(0.0, 0.0), beta(0.0, 0.0);
      for (int k = 0; k < n; ++k) {
        alpha += std::conj(ch.at0(a - 1, k, l, 0)) * ch.at0(a - 1, k, s, 0);
        beta += ch.at0(b - 1, k, l, 0) * std::conj(ch.at0(b - 1, k, s, 0));
      }
      cross += alpha * beta;
      pointwise += std::sqrt(wa(l) * wa(s) * wb(l) * wb(s));
      qa += wa(l) * wa(s);
      qb += wb(l) * wb(s);
    }
  cd.cross = cross.real();
  cd.cross_imag = std::abs(cross.imag());
  cd.identity_residual =
      std::abs(cd.theta_sq - (cd.w_aa * cd.w_ba + cd.w_ab * cd.w_bb + cd.cross));
  cd.pointwise_bound = pointwise;
  cd.summed_bound = std::sqrt(std::max(qa, 0.0) * std::max(qb, 0.0));
  cd.total = cd.w_aa * cd.w_ba + cd.w_ab * cd.w_bb + cd.summed_bound;
  const double fa = std::max(1.0 - std::pow(cd.w_aa + cd.w_ab, 2), 0.0);
  const double fb = std::max(1.0 - std::pow(cd.w_ba + cd.w_bb, 2), 0.0);
  cd.closed_form_total = cd.w_aa * cd.w_ba + cd.w_ab * cd.w_bb + std::sqrt(fa * fb);
  return cd;
}

}  // namespace qmet
