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

#include <qmet/io.hpp>
#include <qmet/scenarios.hpp>

using namespace qmet;
using Catch::Approx;

namespace {
ComplexMatrix mat2(Cx m11, Cx m12, Cx m21, Cx m22) {
  ComplexMatrix m(2, 2);
  m << m11, m12, m21, m22;
  return m;
}
}  // namespace

TEST_CASE("default two-state setup is valid with the expected invariants", "[scenarios]") {
  const TwoStateSetup s = default_two_state_setup();
  CHECK(s.rho.mat(0, 0).real() == Approx(0.5));
  CHECK(s.chi.mat(1, 1).real() == Approx(0.75));
  CHECK(s.cross_residual <= 1e-15);
  CHECK(s.commutator_norm == Approx(0.0625 * std::sqrt(2.0)).margin(1e-15));
}

TEST_CASE("two-state setup rejects invalid pairs, most fundamental check first", "[scenarios]") {
  const ComplexMatrix rho = mat2(0.5, 0.125, 0.125, 0.5);
  const ComplexMatrix chi = mat2(0.25, 0.0625, 0.0625, 0.75);

  SECTION("state validation precedes everything") {
    CHECK_THROWS_AS(make_two_state_setup(mat2(0.6, 0.0, 0.0, 0.5), chi), TraceNotOne);
    CHECK_THROWS_AS(make_two_state_setup(rho, mat2(0.0, 0.5, 0.5, 1.0)), NotPSD);
    CHECK_THROWS_AS(
        make_two_state_setup(maximally_mixed(3).mat, maximally_mixed(3).mat),
        ShapeMismatch);
  }
  SECTION("cross relation") {
    CHECK_THROWS_AS(make_two_state_setup(rho, mat2(0.25, 0.2, 0.2, 0.75)),
                    CrossRelationViolated);
  }
  SECTION("identical states") {
    CHECK_THROWS_AS(make_two_state_setup(rho, rho), DegenerateStates);
  }
  SECTION("commuting states") {
    CHECK_THROWS_AS(
        make_two_state_setup(mat2(0.5, 0.0, 0.0, 0.5), mat2(0.25, 0.0, 0.0, 0.75)),
        StatesCommute);
  }
  SECTION("numerically shared diagonal element") {
    // rho_11 == 0 vs chi_11 == 1e-10: under the 1e-9 equality threshold, yet
    // the states differ and do not commute thanks to chi's off-diagonal.
    const ComplexMatrix a = mat2(0.0, 0.0, 0.0, 1.0);
    const ComplexMatrix b = mat2(1e-10, 0.9e-5, 0.9e-5, 1.0 - 1e-10);
    CHECK_THROWS_AS(make_two_state_setup(a, b), DegenerateStates);
  }
  SECTION("numerically shared off-diagonal element") {
    // Off-diagonals 9e-10 apart (under threshold) with the cross relation
    // exact: 0.9 * 8.01e-8 == 0.89 * 8.1e-8.  Distinct diagonals and a
    // commutator norm of sqrt(2)*9e-10 keep the earlier checks quiet.
    const ComplexMatrix a = mat2(0.9, 8.1e-8, 8.1e-8, 0.1);
    const ComplexMatrix b = mat2(0.89, 8.01e-8, 8.01e-8, 0.11);
    CHECK_THROWS_AS(make_two_state_setup(a, b), DegenerateStates);
  }
}

TEST_CASE("two-state diagonal constraint is the n = 2 two-state kind", "[scenarios]") {
  const auto tc = two_state_diagonal_constraint(default_two_state_setup());
  CHECK(tc.n == 2);
  CHECK(std::string(kind_name(tc.kind)) == "two-state-diag");
}

TEST_CASE("diagonal transfer of tied states leaves no off-diagonal memory", "[scenarios]") {
  const TwoStateSetup setup = default_two_state_setup();
  for (int dc : {1, 2}) {
    const auto channels = sample_two_state_diagonal_channels(setup, dc, 5, 7);
    REQUIRE(channels.size() == 5);
    const TwoStateDiagonalReport rep = verify_two_state_diagonal_theorem(setup, channels);
    REQUIRE(rep.rows.size() == 5);
    for (const auto& row : rep.rows) {
      CHECK(row.constraint_residual <= 1e-10);
      CHECK(row.isometry_residual <= 1e-10);
    }
    CHECK(rep.max_offdiag_memory <= kTheoremTol);
    CHECK(rep.max_zero_block <= kTheoremTol);
    CHECK(rep.theorem_holds);
  }
}

TEST_CASE("theorem verdict needs at least one channel", "[scenarios]") {
  const TwoStateDiagonalReport rep =
      verify_two_state_diagonal_theorem(default_two_state_setup(), {});
  CHECK_FALSE(rep.theorem_holds);
}

TEST_CASE("swap satisfies the two-state off-diagonal system exactly", "[scenarios]") {
  const TwoStateSetup setup = default_two_state_setup();
  CHECK(two_state_nondiagonal_residual(swap_channel(2), setup) <= 1e-15);
}

TEST_CASE("off-diagonal transfer eliminates nothing: a counterexample exists", "[scenarios]") {
  const TwoStateSetup setup = default_two_state_setup();
  OptimizerConfig cfg;
  cfg.restarts = 8;
  const CounterexampleResult res = search_two_state_nondiagonal_counterexample(setup, 2, cfg);
  CHECK(res.found);
  CHECK(res.witness >= 0.5);  // far beyond the 0.05 detection threshold
  CHECK(two_state_nondiagonal_residual(res.opt.channel, setup) <= 1e-10);

  const CounterexampleResult again = search_two_state_nondiagonal_counterexample(setup, 2, cfg);
  CHECK(res.witness == again.witness);
}

TEST_CASE("recorded counterexample channel still witnesses the contrast", "[scenarios]") {
  const std::string path = std::string(QMET_TEST_DATA_DIR) + "/two_state_counterexample.json";
  const io::LoadedChannel lc = io::load_channel(path);
  const ChannelSpec& ch = io::require_valid(lc);
  REQUIRE(ch.n == 2);

  const TwoStateSetup setup = default_two_state_setup();
  CHECK(two_state_nondiagonal_residual(ch, setup) <= 1e-8);
  const MemoryTable mt = memory_table(ch);
  CHECK(std::max(mt.entry(1, 2), mt.diag_difference(1, 2)) >= 0.05);
}
