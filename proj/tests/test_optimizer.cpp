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

#include <qmet/optimizer.hpp>

using namespace qmet;
using Catch::Approx;

namespace {
OptimizerConfig fast_config(int restarts = 4, std::uint64_t seed = 0) {
  OptimizerConfig cfg;
  cfg.restarts = restarts;
  cfg.seed = seed;
  return cfg;
}
}  // namespace

TEST_CASE("warm starts satisfy their constraints exactly", "[optimizer]") {
  struct Case {
    TransferConstraint tc;
    int a, c, dc;
  };
  const std::vector<Case> cases = {
      {make_constraint(3, DiagonalIdeal{1}), 1, 2, 1},
      {make_constraint(3, DiagonalNonIdeal{{{1, 0.7}, {2, 0.3}}}), 1, 2, 1},
      {make_constraint(3, NondiagonalIdeal{1, 2}), 1, 2, 2},
      {make_constraint(2, NondiagonalNonIdeal{1, 2, 0.4}), 1, 2, 1},
      {make_constraint(2, RealPartIdeal{1, 2}), 1, 2, 1},
  };
  for (const auto& cs : cases) {
    const auto starts = warm_start_channels(cs.tc, cs.a, cs.c, cs.dc);
    REQUIRE_FALSE(starts.empty());
    for (const auto& ch : starts) {
      INFO(kind_name(cs.tc.kind));
      CHECK(check_isometry(ch).residual() < 1e-14);
      CHECK(check_constraint(ch, cs.tc) < 1e-14);
    }
  }
}

TEST_CASE("warm start for the damped diagonal pair already sits on the ceiling", "[optimizer]") {
  const double e1 = 0.7, e2 = 0.3;
  const auto tc = make_constraint(3, DiagonalNonIdeal{{{1, e1}, {2, e2}}});
  const auto starts = warm_start_channels(tc, 1, 2, 1);
  REQUIRE(starts.size() == 1);
  CHECK(memory_table(starts[0]).entry(1, 2) ==
        Approx(bound_diagonal(e1, e2)).margin(1e-14));
}

TEST_CASE("maximizer reaches the damped diagonal ceiling", "[optimizer]") {
  const auto tc = make_constraint(3, DiagonalNonIdeal{{{1, 0.5}, {2, 0.5}}});
  const OptResult res = maximize_memory(tc, 1, 2, 1, fast_config());
  REQUIRE(res.bound.has_value());
  CHECK(*res.bound == Approx(0.5));
  CHECK(res.achieved == Approx(*res.bound).margin(1e-9));
  CHECK(res.constraint_residual <= 1e-10);
  CHECK(res.isometry_residual <= 1e-10);
  REQUIRE(res.trace.size() == 4);
  CHECK(res.trace[0].warm_start);
  CHECK_FALSE(res.trace[1].warm_start);
}

TEST_CASE("maximizer reaches the damped nondiagonal ceiling", "[optimizer]") {
  for (double eps : {0.25, 0.75}) {
    const auto tc = make_constraint(2, NondiagonalNonIdeal{1, 2, eps});
    const OptResult res = maximize_memory(tc, 1, 2, 1, fast_config());
    REQUIRE(res.bound.has_value());
    CHECK(res.achieved == Approx(bound_nondiagonal(eps)).margin(1e-9));
  }
}

TEST_CASE("maximizer finds exactly zero memory where elimination forces it", "[optimizer]") {
  const auto tc = make_constraint(3, NondiagonalIdeal{1, 2});
  const OptResult res = maximize_memory(tc, 1, 2, 1, fast_config());
  REQUIRE(res.bound.has_value());
  CHECK(*res.bound == 0.0);
  // Structural-zero projection makes the winner's forbidden overlap exact,
  // not merely sqrt-of-residual small.
  CHECK(res.achieved <= 1e-12);
}

TEST_CASE("unconstrained pairs max out at full overlap", "[optimizer]") {
  // Pair (2,3) is untouched by ideal transfer of element 1; memory can reach
  // the universal ceiling 1.
  const auto tc = make_constraint(3, DiagonalIdeal{1});
  const OptResult res = maximize_memory(tc, 2, 3, 1, fast_config());
  CHECK_FALSE(res.bound.has_value());
  CHECK(res.achieved == Approx(1.0).margin(1e-6));
}

TEST_CASE("maximizer is deterministic for a fixed seed", "[optimizer]") {
  const auto tc = make_constraint(2, NondiagonalNonIdeal{1, 2, 0.6});
  const OptResult r1 = maximize_memory(tc, 1, 2, 2, fast_config(3, 42));
  const OptResult r2 = maximize_memory(tc, 1, 2, 2, fast_config(3, 42));
  CHECK(r1.achieved == r2.achieved);
  CHECK(r1.best_restart == r2.best_restart);
  REQUIRE(r1.channel.c.size() == r2.channel.c.size());
  for (std::size_t i = 0; i < r1.channel.c.size(); ++i) CHECK(r1.channel.c[i] == r2.channel.c[i]);
}

TEST_CASE("maximizer failure modes", "[optimizer]") {
  const auto tc = make_constraint(3, DiagonalIdeal{1});
  CHECK_THROWS_AS(maximize_memory(tc, 0, 2, 1), OutOfRange);
  CHECK_THROWS_AS(maximize_memory(tc, 1, 4, 1), OutOfRange);
  CHECK_THROWS_AS(maximize_memory(tc, 1, 2, 0), OutOfRange);

  try {
    maximize_memory(tc, 1, 2, 1, fast_config(0));
    FAIL("expected Infeasible");
  } catch (const Infeasible& e) {
    CHECK(e.reason == Infeasible::Reason::RestartBudget);
  }

  const auto full = make_constraint(2, DiagonalNonIdeal{{{1, 0.5}, {2, 0.5}}});
  try {
    maximize_memory(full, 1, 2, 1);
    FAIL("expected Infeasible");
  } catch (const Infeasible& e) {
    CHECK(e.reason == Infeasible::Reason::DimensionRule);
  }
}

TEST_CASE("analytic gradient of the penalized objective matches finite differences",
          "[optimizer]") {
  CHECK(gradient_check(make_constraint(3, DiagonalNonIdeal{{{1, 0.5}, {2, 0.5}}}), 1, 2, 1)
            .max_rel_dev <= 1e-5);
  CHECK(gradient_check(make_constraint(2, NondiagonalNonIdeal{1, 2, 0.3}), 1, 2, 2)
            .max_rel_dev <= 1e-5);
  CHECK(gradient_check(make_constraint(3, NondiagonalIdeal{1, 3}), 1, 3, 1).max_rel_dev <= 1e-5);
}

TEST_CASE("eps sweep tracks the ceiling and never increases", "[optimizer]") {
  SweepPlan plan;
  plan.kind = SweepKind::NondiagonalPair;
  plan.n = 2;
  plan.dc = 1;
  plan.grid = {0.2, 0.5, 0.8};
  const SweepResult sr = sweep(plan, fast_config());
  REQUIRE(sr.rows.size() == 3);
  for (const auto& row : sr.rows) {
    REQUIRE(row.bound.has_value());
    CHECK(*row.bound == Approx(bound_nondiagonal(row.eps)));
    CHECK(row.slack >= -1e-8);
    CHECK(row.slack <= 1e-6);  // warm start pins the optimum
  }
  CHECK(sr.monotone_nonincreasing);

  const SweepResult again = sweep(plan, fast_config());
  for (std::size_t i = 0; i < sr.rows.size(); ++i)
    CHECK(sr.rows[i].achieved == again.rows[i].achieved);
}

TEST_CASE("sweep validates its grid", "[optimizer]") {
  SweepPlan plan;
  plan.grid = {};
  CHECK_THROWS_AS(sweep(plan), OutOfRange);
}
