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

#include <algorithm>
#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "qmet/channel.hpp"
#include "qmet/core.hpp"
#include "qmet/forms.hpp"
#include "qmet/solvers.hpp"

namespace qmet {

// What must reach the target exactly.  Every kind below is a condition that
// is linear in the transfer coefficients t(a,b,p,r), because "holds for all
// input states" reduces to matrix-unit inputs by linearity:
//
//   DiagonalIdeal{a}        r~_aa = lam_aa                 t(a,a,p,r) = d_pa d_ra
//   DiagonalNonIdeal{pairs} r~_uu = eps_u lam_uu per pair  t(u,u,p,r) = eps_u d_pu d_ru
//   NondiagonalIdeal{a,b}   r~_ab = lam_ab                 t(a,b,p,r) = d_pa d_rb
//   NondiagonalNonIdeal     r~_ab = eps lam_ab             t(a,b,p,r) = eps d_pa d_rb
//   RealPartIdeal{a,b}      Re r~_ab = Re lam_ab           (t(a,b,p,r) + t(b,a,p,r))/2
//                                                            = (d_pa d_rb + d_pb d_ra)/2
//   TwoStateDiagonal        r~_aa(rho) = rho_aa and r~_aa(chi) = chi_aa for two
//                           given states only (not for all inputs)
//
// The conjugate element (b,a) never needs separate conditions: r~ is Hermitian
// for any admissible channel.

struct DiagonalIdeal {
  int a = 1;
};

struct DiagonalNonIdeal {
  std::vector<std::pair<int, double>> pairs;  // (index, eps), eps in (0,1)
};

struct NondiagonalIdeal {
  int a = 1, b = 2;
};

struct NondiagonalNonIdeal {
  int a = 1, b = 2;
  double eps = 0.5;  // in (0,1)
};

struct RealPartIdeal {
  int a = 1, b = 2;
};

struct TwoStateDiagonal {
  DensityMatrix rho, chi;
  int a = 1;
};

using ConstraintKind = std::variant<DiagonalIdeal, DiagonalNonIdeal, NondiagonalIdeal,
                                    NondiagonalNonIdeal, RealPartIdeal, TwoStateDiagonal>;

struct TransferConstraint {
  int n = 0;
  ConstraintKind kind;
};

inline const char* kind_name(const ConstraintKind& k) {
  switch (k.index()) {
    case 0: return "diag-ideal";
    case 1: return "diag-nonideal";
    case 2: return "nondiag-ideal";
    case 3: return "nondiag-nonideal";
    case 4: return "realpart-ideal";
    default: return "two-state-diag";
  }
}

namespace detail {
inline void check_element_index(int v, int n, const char* what) {
  if (v < 1 || v > n) throw OutOfRange(std::string(what) + " index out of range [1, n]");
}
inline void check_open_eps(double eps) {
  if (!(eps > 0.0 && eps < 1.0))
    throw OutOfRange("eps must lie in the open interval (0, 1); ideal transfer is its own kind");
}
}  // namespace detail

// Validates index ranges and eps domains.  Deliberately does NOT reject
// constraints that are infeasible for deeper reasons; see
// feasible_by_dimension below.
inline TransferConstraint make_constraint(int n, ConstraintKind kind) {
  if (n < 2) throw OutOfRange("constraint requires n >= 2");
  std::visit(
      [&](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, DiagonalIdeal>) {
          detail::check_element_index(k.a, n, "element");
        } else if constexpr (std::is_same_v<T, DiagonalNonIdeal>) {
          if (k.pairs.empty()) throw OutOfRange("diag-nonideal needs at least one (index, eps) pair");
          std::vector<int> seen;
          for (const auto& [u, eps] : k.pairs) {
            detail::check_element_index(u, n, "element");
            detail::check_open_eps(eps);
            if (std::find(seen.begin(), seen.end(), u) != seen.end())
              throw OutOfRange("diag-nonideal indices must be distinct");
            seen.push_back(u);
          }
        } else if constexpr (std::is_same_v<T, NondiagonalIdeal>) {
          detail::check_element_index(k.a, n, "element");
          detail::check_element_index(k.b, n, "element");
          if (k.a == k.b) throw OutOfRange("nondiagonal constraint needs a != b");
        } else if constexpr (std::is_same_v<T, NondiagonalNonIdeal>) {
          detail::check_element_index(k.a, n, "element");
          detail::check_element_index(k.b, n, "element");
          if (k.a == k.b) throw OutOfRange("nondiagonal constraint needs a != b");
          detail::check_open_eps(k.eps);
        } else if constexpr (std::is_same_v<T, RealPartIdeal>) {
          detail::check_element_index(k.a, n, "element");
          detail::check_element_index(k.b, n, "element");
          if (k.a == k.b) throw OutOfRange("real-part constraint needs a != b");
        } else {
          validate_density(k.rho.mat);
          validate_density(k.chi.mat);
          if (k.rho.dim() != n || k.chi.dim() != n)
            throw DimensionMismatch("two-state constraint states must be n x n");
          detail::check_element_index(k.a, n, "element");
        }
      },
      kind);
  return TransferConstraint{n, std::move(kind)};
}

// Dimension-counting feasibility.  Damped diagonal transfer of ALL n diagonal
// elements contradicts trace preservation: summing r~_uu = eps_u lam_uu over a
// full cover forces sum_u eps_u lam_uu = 1 for every input, impossible with
// any eps_u < 1.  Everything else here has an explicit feasible witness.
inline bool feasible_by_dimension(const TransferConstraint& tc) {
  if (const auto* d = std::get_if<DiagonalNonIdeal>(&tc.kind))
    return static_cast<int>(d->pairs.size()) < tc.n;
  return true;
}

namespace detail {

// Shared l-column between bra p-block and ket r-block: the t(a,b,p,r) overlap
// as a form.  Column indices a, b are 1-based.
inline forms::Form transfer_entry_form(const forms::Layout& lay, int a, int b, int p, int r,
                                       Cx target) {
  forms::Form f;
  f.target = target;
  f.terms.reserve(static_cast<std::size_t>(lay.n) * lay.dc);
  for (int k = 0; k < lay.n; ++k)
    for (int m = 0; m < lay.dc; ++m)
      f.terms.push_back({lay.idx(r, k, b - 1, m), lay.idx(p, k, a - 1, m), Cx(1.0, 0.0)});
  return f;
}

// (t(a,b,p,r) + t(b,a,p,r)) / 2 as one form.
inline forms::Form real_part_entry_form(const forms::Layout& lay, int a, int b, int p, int r,
                                        Cx target) {
  forms::Form f;
  f.target = target;
  f.terms.reserve(2 * static_cast<std::size_t>(lay.n) * lay.dc);
  for (int k = 0; k < lay.n; ++k)
    for (int m = 0; m < lay.dc; ++m) {
      f.terms.push_back({lay.idx(r, k, b - 1, m), lay.idx(p, k, a - 1, m), Cx(0.5, 0.0)});
      f.terms.push_back({lay.idx(r, k, a - 1, m), lay.idx(p, k, b - 1, m), Cx(0.5, 0.0)});
    }
  return f;
}

// sum_{p,r} lam_pr t(a,a,p,r) as one form (the a-th diagonal of the target
// state for the specific input lam).
inline forms::Form two_state_entry_form(const forms::Layout& lay, const ComplexMatrix& lam, int a,
                                        Cx target) {
  forms::Form f;
  f.target = target;
  for (int p = 0; p < lay.n; ++p)
    for (int r = 0; r < lay.n; ++r) {
      const Cx w = lam(p, r);
      if (std::abs(w) == 0.0) continue;
      for (int k = 0; k < lay.n; ++k)
        for (int m = 0; m < lay.dc; ++m)
          f.terms.push_back({lay.idx(r, k, a - 1, m), lay.idx(p, k, a - 1, m), w});
    }
  return f;
}

}  // namespace detail

// The defining equations of a constraint as a zero-residual form system over
// channels with the given ancilla dimension.  For kinds whose coefficient
// matrix is Hermitian in (p, r) only the upper triangle is emitted.
inline forms::FormSystem constraint_system(const TransferConstraint& tc, int dc) {
  const int n = tc.n;
  forms::Layout lay{n, dc};
  forms::FormSystem sys(lay);
  const auto d = [](int i, int j) { return i == j ? 1.0 : 0.0; };

  std::visit(
      [&](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, DiagonalIdeal>) {
          for (int p = 0; p < n; ++p)
            for (int r = p; r < n; ++r)
              sys.add(detail::transfer_entry_form(
                  lay, k.a, k.a, p, r, Cx(d(p, k.a - 1) * d(r, k.a - 1), 0.0)));
        } else if constexpr (std::is_same_v<T, DiagonalNonIdeal>) {
          for (const auto& [u, eps] : k.pairs)
            for (int p = 0; p < n; ++p)
              for (int r = p; r < n; ++r)
                sys.add(detail::transfer_entry_form(
                    lay, u, u, p, r, Cx(eps * d(p, u - 1) * d(r, u - 1), 0.0)));
        } else if constexpr (std::is_same_v<T, NondiagonalIdeal>) {
          for (int p = 0; p < n; ++p)
            for (int r = 0; r < n; ++r)
              sys.add(detail::transfer_entry_form(
                  lay, k.a, k.b, p, r, Cx(d(p, k.a - 1) * d(r, k.b - 1), 0.0)));
        } else if constexpr (std::is_same_v<T, NondiagonalNonIdeal>) {
          for (int p = 0; p < n; ++p)
            for (int r = 0; r < n; ++r)
              sys.add(detail::transfer_entry_form(
                  lay, k.a, k.b, p, r, Cx(k.eps * d(p, k.a - 1) * d(r, k.b - 1), 0.0)));
        } else if constexpr (std::is_same_v<T, RealPartIdeal>) {
          for (int p = 0; p < n; ++p)
            for (int r = p; r < n; ++r)
              sys.add(detail::real_part_entry_form(
                  lay, k.a, k.b, p, r,
                  Cx(0.5 * (d(p, k.a - 1) * d(r, k.b - 1) + d(p, k.b - 1) * d(r, k.a - 1)),
                     0.0)));
        } else {
          sys.add(detail::two_state_entry_form(lay, k.rho.mat, k.a,
                                               k.rho.mat(k.a - 1, k.a - 1)));
          sys.add(detail::two_state_entry_form(lay, k.chi.mat, k.a,
                                               k.chi.mat(k.a - 1, k.a - 1)));
        }
      },
      tc.kind);
  return sys;
}

// Max-abs residual of the defining equations.  Total for any channel with
// matching n; does not require the channel to be an isometry.
inline double check_constraint(const ChannelSpec& ch, const TransferConstraint& tc) {
  if (ch.n != tc.n) throw DimensionMismatch("channel n does not match constraint n");
  const forms::FormSystem sys = constraint_system(tc, ch.dc);
  double worst = 0.0;
  for (const auto& f : sys.forms())
    worst = std::max(worst, std::abs(forms::FormSystem::value(f, ch.c) - f.target));
  return worst;
}

// --- structural zeros ---------------------------------------------------------

// Amplitude blocks that the constraint forces to vanish on every admissible
// channel.  "column" blocks are foreign sources feeding the transferred target
// column: |c^p_ku> with p != u.  "row" blocks are the transferred source
// feeding other target columns: |c^u_kl> with l != u.  Ideal diagonal transfer
// forces both families; damped diagonal transfer only the column family;
// ideal non-diagonal transfer forces the row families of both of its indices.
struct ZeroBlockEntry {
  std::string family;  // "column" or "row"
  int u = 0;           // the transferred index the family belongs to
  int other = 0;       // p (column family) or l (row family)
  int k = 0;
  double norm = 0.0;  // ||c^p_ku|| resp. ||c^u_kl|| over the ancilla components
};

struct StructuralZeroReport {
  std::vector<ZeroBlockEntry> blocks;
  double max_norm() const {
    double v = 0.0;
    for (const auto& b : blocks) v = std::max(v, b.norm);
    return v;
  }
};

namespace detail {

inline double block_norm(const ChannelSpec& ch, int p, int k, int l) {
  double s = 0.0;
  for (int m = 0; m < ch.dc; ++m) s += std::norm(ch.at0(p - 1, k - 1, l - 1, m));
  return std::sqrt(s);
}

inline void add_column_family(const ChannelSpec& ch, int u, StructuralZeroReport& rep) {
  for (int p = 1; p <= ch.n; ++p) {
    if (p == u) continue;
    for (int k = 1; k <= ch.n; ++k)
      rep.blocks.push_back({"column", u, p, k, block_norm(ch, p, k, u)});
  }
}

inline void add_row_family(const ChannelSpec& ch, int u, StructuralZeroReport& rep) {
  for (int l = 1; l <= ch.n; ++l) {
    if (l == u) continue;
    for (int k = 1; k <= ch.n; ++k)
      rep.blocks.push_back({"row", u, l, k, block_norm(ch, u, k, l)});
  }
}

}  // namespace detail

inline StructuralZeroReport structural_zero_report(const ChannelSpec& ch,
                                                   const TransferConstraint& tc) {
  if (ch.n != tc.n) throw DimensionMismatch("channel n does not match constraint n");
  StructuralZeroReport rep;
  std::visit(
      [&](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, DiagonalIdeal>) {
          detail::add_column_family(ch, k.a, rep);
          detail::add_row_family(ch, k.a, rep);
        } else if constexpr (std::is_same_v<T, DiagonalNonIdeal>) {
          for (const auto& [u, eps] : k.pairs) detail::add_column_family(ch, u, rep);
        } else if constexpr (std::is_same_v<T, NondiagonalIdeal>) {
          detail::add_row_family(ch, k.a, rep);
          detail::add_row_family(ch, k.b, rep);
        } else if constexpr (std::is_same_v<T, TwoStateDiagonal>) {
          // Forced only in the n = 2 two-state theorem setting; reported
          // unconditionally, asserted by callers in that setting.
          detail::add_column_family(ch, k.a, rep);
          detail::add_row_family(ch, k.a, rep);
        } else {
          (void)k;  // non-ideal nondiagonal and real-part kinds force no blocks
        }
      },
      tc.kind);
  return rep;
}

// --- structural zero projection --------------------------------------------------

// A solver that only drives the residual forms to s leaves amplitudes of size
// sqrt(s) in the forced-zero blocks (the block weight enters the forms
// quadratically), and the memory norms pick those up at first order.  Zeroing
// the blocks outright and restoring feasibility removes that square-root
// artifact; on constraints that force no blocks this is the identity.  The
// result is not guaranteed admissible (the blocks are only forced under each
// kind's premises), so callers re-check and fall back to the input.
//
// Ideal non-diagonal transfer forces one more exact feature beyond the zero
// blocks.  Once the row families of a and b vanish, source a survives only on
// target column a (vector x over (k, m)) and source b only on column b
// (vector y), and the remaining conditions on the pair are ||x|| = ||y|| = 1
// with <y, x> = 1: the Cauchy-Schwarz equality case, so exactly x = y.  A
// solver stops at ||x - y|| ~ sqrt(residual) and the diagonal memory
// difference ||theta(a,a) - theta(b,b)|| inherits that at first order.
// Identifying the two vectors (and re-orthogonalizing the foreign blocks they
// couple to, which keeps every other form correct to second order) removes
// the artifact the same way the zeroing does.
inline ChannelSpec project_structural_zeros(const ChannelSpec& ch, const TransferConstraint& tc) {
  const StructuralZeroReport rep = structural_zero_report(ch, tc);
  if (rep.blocks.empty()) return ch;
  ChannelSpec out = ch;
  for (const auto& b : rep.blocks)
    for (int m = 1; m <= out.dc; ++m) {
      if (b.family == "column")
        out.at(b.other, b.k, b.u, m) = Cx(0.0, 0.0);
      else
        out.at(b.u, b.k, b.other, m) = Cx(0.0, 0.0);
    }
  if (const auto* ni = std::get_if<NondiagonalIdeal>(&tc.kind)) {
    const int a = ni->a, b = ni->b;
    const auto slot = [&](int k, int m) { return (k - 1) * out.dc + (m - 1); };
    std::vector<Cx> v(static_cast<std::size_t>(out.n) * out.dc);
    double nv2 = 0.0;
    for (int k = 1; k <= out.n; ++k)
      for (int m = 1; m <= out.dc; ++m) {
        v[slot(k, m)] = out.at(a, k, a, m) + out.at(b, k, b, m);
        nv2 += std::norm(v[slot(k, m)]);
      }
    if (nv2 > 1e-12) {  // ~4 on any near-admissible channel
      const double inv = 1.0 / std::sqrt(nv2);
      for (Cx& z : v) z *= inv;
      for (int k = 1; k <= out.n; ++k)
        for (int m = 1; m <= out.dc; ++m) {
          out.at(a, k, a, m) = v[slot(k, m)];
          out.at(b, k, b, m) = v[slot(k, m)];
        }
      for (int q = 1; q <= out.n; ++q) {
        if (q == a || q == b) continue;
        for (const int l : {a, b}) {
          Cx ip(0.0, 0.0);
          for (int k = 1; k <= out.n; ++k)
            for (int m = 1; m <= out.dc; ++m) ip += std::conj(v[slot(k, m)]) * out.at(q, k, l, m);
          for (int k = 1; k <= out.n; ++k)
            for (int m = 1; m <= out.dc; ++m) out.at(q, k, l, m) -= ip * v[slot(k, m)];
        }
      }
    }
  }
  forms::FormSystem sys = forms::isometry_system(out.n, out.dc);
  sys.append(constraint_system(tc, out.dc));
  out.c = solvers::lm_solve(sys, out.c).c;
  return out;
}

// --- feasibility sampling -------------------------------------------------------

// Random admissible channel satisfying tc: Levenberg-Marquardt on the joint
// isometry + constraint system from random isometry starts.  The solve is run
// to machine-level convergence regardless of tol (see solvers.hpp for why);
// tol only decides whether the result is accepted.  Accepted channels are
// projected onto the forced-zero pattern when that projection survives the
// admissibility checks, so downstream norm measurements see exact zeros
// instead of sqrt-of-residual junk.
inline ChannelSpec sample_satisfying_channel(const TransferConstraint& tc, int n, int dc,
                                             std::uint64_t seed, double tol = kIsometryTol,
                                             int restarts = 16) {
  if (n != tc.n) throw DimensionMismatch("requested n does not match constraint n");
  if (dc < 1) throw OutOfRange("dc must be >= 1");
  if (!feasible_by_dimension(tc))
    throw Infeasible(Infeasible::Reason::DimensionRule,
                     "damped diagonal transfer of all " + std::to_string(n) +
                         " diagonal elements contradicts trace preservation");

  forms::FormSystem sys = forms::isometry_system(n, dc);
  sys.append(constraint_system(tc, dc));

  const auto admissible = [&](const ChannelSpec& ch) {
    return check_isometry(ch).ok(tol) && check_constraint(ch, tc) <= tol;
  };
  for (int i = 0; i < restarts; ++i) {
    const ChannelSpec start = random_isometry_channel(n, dc, mix_seed(seed, i));
    solvers::LmResult res = solvers::lm_solve(sys, start.c);
    ChannelSpec ch = forms::from_params(n, dc, res.c);
    // Project before admission: forced-zero amplitudes enter the residuals
    // quadratically, so the solver alone crawls toward them and may sit just
    // above tolerance where the projected point is exact.
    ChannelSpec projected = project_structural_zeros(ch, tc);
    if (admissible(projected)) return projected;
    if (admissible(ch)) return ch;
  }
  throw Infeasible(Infeasible::Reason::RestartBudget,
                   "no admissible channel found in " + std::to_string(restarts) + " restarts");
}

}  // namespace qmet
