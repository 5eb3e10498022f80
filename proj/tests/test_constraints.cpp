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

#include <catch2/catch_amalgamated.hpp>

#include <qmet/bounds.hpp>
#include <qmet/constraints.hpp>
#include <qmet/memory.hpp>

using namespace qmet;
using Catch::Approx;

TEST_CASE("constraint construction validates its parameters", "[constraints]") {
  CHECK_THROWS_AS(make_constraint(1, DiagonalIdeal{1}), OutOfRange);
  CHECK_THROWS_AS(make_constraint(3, DiagonalIdeal{0}), OutOfRange);
  CHECK_THROWS_AS(make_constraint(3, DiagonalIdeal{4}), OutOfRange);
  CHECK_THROWS_AS(make_constraint(3, NondiagonalIdeal{2, 2}), OutOfRange);
  CHECK_THROWS_AS(make_constraint(3, NondiagonalNonIdeal{1, 2, 0.0}), OutOfRange);
  CHECK_THROWS_AS(make_constraint(3, NondiagonalNonIdeal{1, 2, 1.0}), OutOfRange);
  CHECK_THROWS_AS(make_constraint(3, DiagonalNonIdeal{}), OutOfRange);
  CHECK_THROWS_AS(make_constraint(3, DiagonalNonIdeal{{{1, 0.5}, {1, 0.25}}}), OutOfRange);
  CHECK_THROWS_AS(make_constraint(3, RealPartIdeal{3, 3}), OutOfRange);
  CHECK_NOTHROW(make_constraint(3, DiagonalNonIdeal{{{1, 0.5}, {2, 0.25}}}));

  // Full cover of the diagonal is constructible; feasibility is a separate
  // question answered by the dimension rule.
  const auto full = make_constraint(2, DiagonalNonIdeal{{{1, 0.5}, {2, 0.5}}});
  CHECK_FALSE(feasible_by_dimension(full));
  CHECK(feasible_by_dimension(make_constraint(2, DiagonalNonIdeal{{{1, 0.5}}})));

  ComplexMatrix not_density(2, 2);
  not_density << 1.0, 0.5, 0.5, 0.0;
  CHECK_THROWS_AS(
      make_constraint(2, TwoStateDiagonal{DensityMatrix{not_density}, maximally_mixed(2), 1}),
      NotPSD);
  CHECK_THROWS_AS(
      make_constraint(3, TwoStateDiagonal{maximally_mixed(2), maximally_mixed(2), 1}),
      DimensionMismatch);
}

TEST_CASE("kind names are stable strings", "[constraints]") {
  CHECK(std::string(kind_name(DiagonalIdeal{})) == "diag-ideal");
  CHECK(std::string(kind_name(DiagonalNonIdeal{})) == "diag-nonideal");
  CHECK(std::string(kind_name(NondiagonalIdeal{})) == "nondiag-ideal");
  CHECK(std::string(kind_name(NondiagonalNonIdeal{})) == "nondiag-nonideal");
  CHECK(std::string(kind_name(RealPartIdeal{})) == "realpart-ideal");
  CHECK(std::string(kind_name(TwoStateDiagonal{maximally_mixed(2), maximally_mixed(2), 1})) ==
        "two-state-diag");
}

TEST_CASE("identity channel fails ideal diagonal transfer with residual one", "[constraints]") {
  // The identity channel parks the target in |1><1|, so r~_11 = 1 regardless
  // of lam_11; the worst defining equation misses by exactly 1 (the t(1,1,2,2)
  // coefficient, which should vanish but equals 1).
  const auto tc = make_constraint(3, DiagonalIdeal{1});
  CHECK(check_constraint(identity_channel(3), tc) == Approx(1.0).margin(1e-15));
}

TEST_CASE("full transfer satisfies every ideal kind exactly", "[constraints]") {
  const ChannelSpec sw = swap_channel(3);
  CHECK(check_constraint(sw, make_constraint(3, DiagonalIdeal{2})) == 0.0);
  CHECK(check_constraint(sw, make_constraint(3, NondiagonalIdeal{1, 3})) == 0.0);
  CHECK(check_constraint(sw, make_constraint(3, RealPartIdeal{2, 3})) == 0.0);
}

TEST_CASE("saturating builders satisfy their constraints exactly", "[constraints]") {
  const ChannelSpec diag = build_saturating_diagonal(3, 0.25, 0.75);
  CHECK(check_constraint(diag, make_constraint(3, DiagonalNonIdeal{{{1, 0.25}, {2, 0.75}}})) <
        1e-15);

  const ChannelSpec nd = build_saturating_nondiagonal(3, 0.6);
  CHECK(check_constraint(nd, make_constraint(3, NondiagonalNonIdeal{1, 2, 0.6})) < 1e-15);
  // Its transfer coefficient at (1,2,1,2) is exactly eps.
  const TransferTensor t = transfer_tensor(nd);
  CHECK(std::abs(t.at(1, 2, 1, 2) - Cx(0.6, 0.0)) < 1e-15);
}

TEST_CASE("constraint residual requires matching dimensions", "[constraints]") {
  const auto tc = make_constraint(3, DiagonalIdeal{1});
  CHECK_THROWS_AS(check_constraint(identity_channel(2), tc), DimensionMismatch);
}

TEST_CASE("structural zero families per kind", "[constraints]") {
  const ChannelSpec ch = random_isometry_channel(3, 1, 59);
  const auto count = [&](const ConstraintKind& k) {
    return structural_zero_report(ch, make_constraint(3, k)).blocks.size();
  };
  CHECK(count(DiagonalIdeal{1}) == 12);                      // column (6) + row (6)
  CHECK(count(DiagonalNonIdeal{{{1, 0.5}, {2, 0.5}}}) == 12);  // column families only
  CHECK(count(NondiagonalIdeal{1, 2}) == 12);                // row families of both
  CHECK(count(NondiagonalNonIdeal{1, 2, 0.5}) == 0);
  CHECK(count(RealPartIdeal{1, 2}) == 0);
}

TEST_CASE("sampled channels satisfy ideal diagonal transfer", "[constraints]") {
  const auto tc = make_constraint(2, DiagonalIdeal{1});
  const ChannelSpec ch = sample_satisfying_channel(tc, 2, 1, 0);
  CHECK(check_isometry(ch).residual() <= 1e-10);
  CHECK(check_constraint(ch, tc) <= 1e-10);
  // The theory forces both block families to vanish; the sampler projects
  // them to exact zeros.
  CHECK(structural_zero_report(ch, tc).max_norm() == 0.0);
  CHECK(memory_table(ch).entry(1, 2) < 1e-10);

  const ChannelSpec again = sample_satisfying_channel(tc, 2, 1, 0);
  CHECK(ch.c == again.c);
  const ChannelSpec other = sample_satisfying_channel(tc, 2, 1, 1);
  CHECK(ch.c != other.c);
}

TEST_CASE("sampled channels satisfy ideal nondiagonal transfer", "[constraints]") {
  const auto tc = make_constraint(3, NondiagonalIdeal{1, 2});
  const ChannelSpec ch = sample_satisfying_channel(tc, 3, 2, 0);
  CHECK(check_constraint(ch, tc) <= 1e-10);
  const MemoryTable mt = memory_table(ch);
  CHECK(mt.entry(1, 2) <= 1e-7);
  CHECK(mt.diag_difference(1, 2) <= 1e-7);
}

TEST_CASE("sampling rejects impossible or mismatched requests", "[constraints]") {
  const auto full = make_constraint(2, DiagonalNonIdeal{{{1, 0.5}, {2, 0.5}}});
  try {
    sample_satisfying_channel(full, 2, 1, 0);
    FAIL("expected Infeasible");
  } catch (const Infeasible& e) {
    CHECK(e.reason == Infeasible::Reason::DimensionRule);
  }
  const auto tc = make_constraint(3, DiagonalIdeal{1});
  CHECK_THROWS_AS(sample_satisfying_channel(tc, 2, 1, 0), DimensionMismatch);
}

TEST_CASE("projection removes forced blocks and keeps admissibility", "[constraints]") {
  const auto tc = make_constraint(3, DiagonalNonIdeal{{{1, 0.5}, {2, 0.5}}});
  ChannelSpec ch = build_saturating_diagonal(3, 0.5, 0.5);
  // Plant junk of the size a crawling solver typically leaves behind.
  ch.at(2, 1, 1) = Cx(3e-8, -2e-8);
  ch.at(3, 2, 2) = Cx(0.0, 4e-8);
  const ChannelSpec proj = project_structural_zeros(ch, tc);
  CHECK(structural_zero_report(proj, tc).max_norm() < 1e-14);
  CHECK(check_isometry(proj).residual() < 1e-12);
  CHECK(check_constraint(proj, tc) < 1e-12);
}
