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

// Two qubit states with tied off-diagonals: any channel moving both diagonal
// elements ideally is forced to erase the off-diagonal memory, while asking
// only for the off-diagonal element leaves room for a large witness.

#include <cstdio>

#include <qmet/qmet.hpp>

int main() {
  using namespace qmet;

  const TwoStateSetup setup = default_two_state_setup();
  std::printf("cross residual %.2e, commutator norm %.4f\n", setup.cross_residual,
              setup.commutator_norm);

  const auto channels = sample_two_state_diagonal_channels(setup, 2, 10, 1);
  const TwoStateDiagonalReport rep = verify_two_state_diagonal_theorem(setup, channels);
  std::printf("diagonal transfer, %zu sampled channels: max off-diagonal memory %.3e\n",
              rep.rows.size(), rep.max_offdiag_memory);

  OptimizerConfig cfg;
  cfg.restarts = 8;
  const CounterexampleResult ce = search_two_state_nondiagonal_counterexample(setup, 2, cfg);
  std::printf("off-diagonal transfer only: witness %.4f (found: %s)\n", ce.witness,
              ce.found ? "yes" : "no");
  return 0;
}
