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
#include <vector>

#include "qmet/constraints.hpp"
#include "qmet/memory.hpp"
#include "qmet/optimizer.hpp"

namespace qmet {

// Two qubit-sized states whose diagonal elements can be transferred by a
// single channel.  Validity demands, in this order:
//   1. both are density matrices (2 x 2),
//   2. the cross relation rho_11 chi_12 == chi_11 rho_12 (otherwise no channel
//      transfers both diagonals while the elimination analysis applies),
//   3. the states are not (numerically) identical,
//   4. they do not commute (commuting pairs make the problem classical),
//   5. their diagonals and off-diagonals actually differ element-wise.
struct TwoStateSetup {
  DensityMatrix rho, chi;
  double cross_residual = 0.0;   // |rho_11 chi_12 - chi_11 rho_12|
  double commutator_norm = 0.0;  // ||rho chi - chi rho||
};

inline TwoStateSetup make_two_state_setup(const ComplexMatrix& rho_in,
                                          const ComplexMatrix& chi_in) {
  const DensityMatrix rho = validate_density(rho_in);
  const DensityMatrix chi = validate_density(chi_in);
  if (rho.dim() != 2 || chi.dim() != 2)
    throw ShapeMismatch("two-state setup requires 2 x 2 states");

  TwoStateSetup s{rho, chi};
  s.cross_residual = std::abs(rho.mat(0, 0) * chi.mat(0, 1) - chi.mat(0, 0) * rho.mat(0, 1));
  if (s.cross_residual > 1e-12)
    throw CrossRelationViolated("cross relation rho_11*chi_12 == chi_11*rho_12 violated by " +
                                std::to_string(s.cross_residual));
  if ((rho.mat - chi.mat).cwiseAbs().maxCoeff() <= 1e-9)
    throw DegenerateStates("the two states coincide");
  s.commutator_norm = frobenius_norm(rho.mat * chi.mat - chi.mat * rho.mat);
  if (s.commutator_norm <= 1e-9) throw StatesCommute("the two states commute");
  if (std::abs(rho.mat(0, 0) - chi.mat(0, 0)) <= 1e-9)
    throw DegenerateStates("the states share the diagonal element rho_11 == chi_11");
  if (std::abs(rho.mat(0, 1) - chi.mat(0, 1)) <= 1e-9)
    throw DegenerateStates("the states share the off-diagonal element rho_12 == chi_12");
  return s;
}

// The default worked pair: distinct diagonals, proportional off-diagonals,
// non-commuting.
inline TwoStateSetup default_two_state_setup() {
  ComplexMatrix rho(2, 2), chi(2, 2);
  rho << Cx(0.5, 0.0), Cx(0.125, 0.0), Cx(0.125, 0.0), Cx(0.5, 0.0);
  chi << Cx(0.25, 0.0), Cx(0.0625, 0.0), Cx(0.0625, 0.0), Cx(0.75, 0.0);
  return make_two_state_setup(rho, chi);
}

inline TransferConstraint two_state_diagonal_constraint(const TwoStateSetup& s) {
  return make_constraint(2, TwoStateDiagonal{s.rho, s.chi, 1});
}

// Elimination theorem for diagonal transfer of two tied states: every
// admissible channel has theta(1,2) == 0 (and the corresponding structural
// zero blocks).  Verified over a set of channels, usually sampled.
struct TwoStateChannelRow {
  double constraint_residual = 0.0;
  double isometry_residual = 0.0;
  double offdiag_memory = 0.0;   // ||theta(1,2)||
  double max_zero_block = 0.0;
};

struct TwoStateDiagonalReport {
  std::vector<TwoStateChannelRow> rows;
  double max_offdiag_memory = 0.0;
  double max_zero_block = 0.0;
  bool theorem_holds = false;  // max_offdiag_memory <= kTheoremTol over admissible rows
};

inline TwoStateDiagonalReport verify_two_state_diagonal_theorem(
    const TwoStateSetup& setup, const std::vector<ChannelSpec>& channels) {
  const TransferConstraint tc = two_state_diagonal_constraint(setup);
  TwoStateDiagonalReport rep;
  for (const ChannelSpec& ch : channels) {
    TwoStateChannelRow row;
    row.constraint_residual = check_constraint(ch, tc);
    row.isometry_residual = check_isometry(ch).residual();
    row.offdiag_memory = memory_table(ch).entry(1, 2);
    row.max_zero_block = structural_zero_report(ch, tc).max_norm();
    rep.max_offdiag_memory = std::max(rep.max_offdiag_memory, row.offdiag_memory);
    rep.max_zero_block = std::max(rep.max_zero_block, row.max_zero_block);
    rep.rows.push_back(row);
  }
  rep.theorem_holds = !rep.rows.empty() && rep.max_offdiag_memory <= kTheoremTol;
  return rep;
}

inline std::vector<ChannelSpec> sample_two_state_diagonal_channels(const TwoStateSetup& setup,
                                                                   int dc, int count,
                                                                   std::uint64_t seed) {
  const TransferConstraint tc = two_state_diagonal_constraint(setup);
  std::vector<ChannelSpec> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i)
    out.push_back(sample_satisfying_channel(tc, 2, dc, mix_seed(seed, 1000 + i)));
  return out;
}

// Transfer of the off-diagonal element of both states only (not all inputs):
//   r~_12(rho) = rho_12  and  r~_12(chi) = chi_12.
inline forms::FormSystem two_state_nondiagonal_system(const TwoStateSetup& s, int dc) {
  forms::Layout lay{2, dc};
  forms::FormSystem sys(lay);
  auto add_state = [&](const ComplexMatrix& lam) {
    forms::Form f;
    f.target = lam(0, 1);
    for (int p = 0; p < 2; ++p)
      for (int r = 0; r < 2; ++r) {
        const Cx w = lam(p, r);
        if (std::abs(w) == 0.0) continue;
        for (int k = 0; k < 2; ++k)
          for (int m = 0; m < dc; ++m)
            f.terms.push_back({lay.idx(r, k, 1, m), lay.idx(p, k, 0, m), w});
      }
    sys.add(std::move(f));
  };
  add_state(s.rho.mat);
  add_state(s.chi.mat);
  return sys;
}

inline double two_state_nondiagonal_residual(const ChannelSpec& ch, const TwoStateSetup& s) {
  const forms::FormSystem sys = two_state_nondiagonal_system(s, ch.dc);
  double worst = 0.0;
  for (const auto& f : sys.forms())
    worst = std::max(worst, std::abs(forms::FormSystem::value(f, ch.c) - f.target));
  return worst;
}

// In contrast with the diagonal case, exact two-state transfer of the
// off-diagonal element eliminates nothing: channels with macroscopic memory
// survive.  This search produces such a witness by maximizing ||theta(1,2)||
// under the two-state non-diagonal system.
struct CounterexampleResult {
  OptResult opt;
  MemoryTable table;
  double witness = 0.0;  // max(||theta(1,2)||, diag difference), the eliminated quantities
  bool found = false;    // witness >= 0.05
};

inline CounterexampleResult search_two_state_nondiagonal_counterexample(
    const TwoStateSetup& setup, int dc, const OptimizerConfig& cfg = {}) {
  const forms::FormSystem objective = forms::theta_entry_system(2, dc, 1, 2);
  forms::FormSystem penalty = forms::isometry_system(2, dc);
  penalty.append(two_state_nondiagonal_system(setup, dc));

  CounterexampleResult out;
  out.opt = detail::maximize_core(
      2, dc, objective, penalty,
      [&](const ChannelSpec& ch) { return two_state_nondiagonal_residual(ch, setup); }, {}, cfg);
  out.table = memory_table(out.opt.channel);
  out.witness = std::max(out.table.entry(1, 2), out.table.diag_difference(1, 2));
  out.found = out.witness >= 0.05;
  return out;
}

}  // namespace qmet
