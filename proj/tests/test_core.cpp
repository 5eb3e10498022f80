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

#include <cmath>
#include <set>

#include <qmet/core.hpp>

using namespace qmet;
using Catch::Approx;

TEST_CASE("frobenius norm matches the hand value", "[core]") {
  ComplexMatrix m(2, 2);
  m << Cx(3, 0), Cx(0, 4), Cx(0, 0), Cx(0, 0);
  CHECK(frobenius_norm(m) == Approx(5.0).margin(1e-15));
}

TEST_CASE("hermitian eigenvalues come out ascending", "[core]") {
  ComplexMatrix m(3, 3);
  m.setZero();
  m(0, 0) = 2.0;
  m(1, 1) = -1.0;
  m(2, 2) = 0.5;
  const RealVector ev = hermitian_eigenvalues(m);
  REQUIRE(ev.size() == 3);
  CHECK(ev(0) == Approx(-1.0));
  CHECK(ev(1) == Approx(0.5));
  CHECK(ev(2) == Approx(2.0));
}

TEST_CASE("maximally mixed state has flat spectrum", "[core]") {
  for (int n : {2, 3, 5}) {
    const DensityMatrix rho = maximally_mixed(n);
    const RealVector ev = hermitian_eigenvalues(rho.mat);
    for (int i = 0; i < n; ++i) CHECK(ev(i) == Approx(1.0 / n).margin(1e-14));
  }
}

TEST_CASE("a correlated qubit state validates with the closed-form spectrum", "[core]") {
  ComplexMatrix m(2, 2);
  m << 0.5, 0.125, 0.125, 0.5;
  const DensityMatrix rho = validate_density(m);
  const RealVector ev = hermitian_eigenvalues(rho.mat);
  // 2x2 closed form: 1/2 +- |offdiag|.
  CHECK(ev(0) == Approx(0.375).margin(1e-14));
  CHECK(ev(1) == Approx(0.625).margin(1e-14));
}

TEST_CASE("indefinite matrix is rejected with its minimum eigenvalue", "[core]") {
  ComplexMatrix m(2, 2);
  m << 1.0, 0.5, 0.5, 0.0;
  try {
    validate_density(m);
    FAIL("expected NotPSD");
  } catch (const NotPSD& e) {
    // closed form (1 - sqrt(2)) / 2
    CHECK(e.min_eigenvalue == Approx((1.0 - std::sqrt(2.0)) / 2.0).margin(1e-12));
  }
}

TEST_CASE("trace and hermiticity violations carry their deviation", "[core]") {
  ComplexMatrix m(2, 2);
  m << 0.5, 0.0, 0.0, 0.6;
  try {
    validate_density(m);
    FAIL("expected TraceNotOne");
  } catch (const TraceNotOne& e) {
    CHECK(e.trace == Approx(1.1).margin(1e-14));
  }

  ComplexMatrix h(2, 2);
  h << 0.5, Cx(0.0, 0.25), Cx(0.0, 0.25), 0.5;  // equal corners: anti-Hermitian offdiag
  CHECK_THROWS_AS(validate_density(h), NotHermitian);

  ComplexMatrix r(2, 3);
  r.setZero();
  CHECK_THROWS_AS(validate_density(r), ShapeMismatch);
}

TEST_CASE("validation rejects non-finite entries before anything else", "[core]") {
  ComplexMatrix m(2, 2);
  m << 0.5, 0.0, 0.0, std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(validate_density(m), ShapeMismatch);
}

TEST_CASE("rng streams are reproducible and seed-separated", "[core]") {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 64; ++i) {
    const double u = a.uniform();
    CHECK(u == b.uniform());
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  bool differs = false;
  Rng a2(42);
  for (int i = 0; i < 16; ++i) differs |= (a2.uniform() != c.uniform());
  CHECK(differs);
}

TEST_CASE("gaussian draws have sane first moments", "[core]") {
  Rng rng(7);
  double sum = 0.0, sum_sq = 0.0;
  const int kN = 20000;
  for (int i = 0; i < kN; ++i) {
    const double g = rng.gaussian();
    sum += g;
    sum_sq += g * g;
  }
  CHECK(std::abs(sum / kN) < 0.05);
  CHECK(sum_sq / kN == Approx(1.0).margin(0.05));
}

TEST_CASE("mix_seed decorrelates stream indices", "[core]") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 100; ++i) seen.insert(mix_seed(0, i));
  CHECK(seen.size() == 100);
  CHECK(mix_seed(1, 0) != mix_seed(0, 0));
}

TEST_CASE("sampled densities validate and are seed-deterministic", "[core]") {
  for (int n : {2, 3, 4}) {
    const DensityMatrix rho = sample_density(n, 5);
    const DensityMatrix again = sample_density(n, 5);
    CHECK(frobenius_norm(rho.mat - again.mat) == 0.0);
    CHECK(std::abs(rho.mat.trace().real() - 1.0) < 1e-12);
    const RealVector ev = hermitian_eigenvalues(rho.mat);
    CHECK(ev(0) >= -1e-12);
  }
  const DensityMatrix a = sample_density(3, 1);
  const DensityMatrix b = sample_density(3, 2);
  CHECK(frobenius_norm(a.mat - b.mat) > 1e-3);
  CHECK_THROWS_AS(sample_density(1, 0), OutOfRange);
}

TEST_CASE("random unitaries are unitary", "[core]") {
  Rng rng(11);
  for (int n : {2, 4}) {
    const ComplexMatrix u = random_unitary(n, rng);
    const ComplexMatrix g = u.adjoint() * u;
    CHECK(frobenius_norm(g - ComplexMatrix::Identity(n, n)) < 1e-12);
  }
}
