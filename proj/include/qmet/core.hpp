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

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "qmet/errors.hpp"

namespace qmet {

inline constexpr const char* kVersion = "0.1.0";

using Cx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

// Validation and acceptance tolerances.  These are part of the observable
// contract (tests and the CLI rely on them), so they live here, not in the
// functions that use them.
inline constexpr double kHermitianTol = 1e-12;   // max |m - m^H| entry
inline constexpr double kTraceTol = 1e-12;       // |tr(m) - 1|
inline constexpr double kPsdFloor = -1e-10;      // min eigenvalue may not dip below
inline constexpr double kIsometryTol = 1e-10;    // channel validity
inline constexpr double kTheoremTol = 1e-7;      // memory-elimination checks
inline constexpr double kResidualTol = 1e-8;     // admissibility of constrained channels
inline constexpr double kBoundSlack = 1e-8;      // bound - achieved may not dip below -this
inline constexpr double kChainTol = 1e-10;       // inequality-chain diagnostics
inline constexpr double kMinFdStep = 1e-12;      // finite-difference step floor

inline double frobenius_norm(const ComplexMatrix& m) { return m.norm(); }

// Eigenvalues of a Hermitian matrix, ascending.  The caller is responsible
// for m actually being Hermitian; Eigen only reads the lower triangle.
inline RealVector hermitian_eigenvalues(const ComplexMatrix& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

// A density matrix that passed validate_density.  Plain aggregate on purpose:
// all call sites treat it as an immutable value.
struct DensityMatrix {
  ComplexMatrix mat;
  int dim() const { return static_cast<int>(mat.rows()); }
};

inline DensityMatrix validate_density(const ComplexMatrix& m) {
  if (m.rows() != m.cols() || m.rows() < 1) {
    throw ShapeMismatch("density matrix must be square and non-empty, got " +
                        std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
  if (!m.allFinite()) throw ShapeMismatch("density matrix has non-finite entries");
  const double herm_dev = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (herm_dev > kHermitianTol) throw NotHermitian(herm_dev);
  const Cx tr = m.trace();
  if (std::abs(tr - Cx(1.0, 0.0)) > kTraceTol) throw TraceNotOne(tr.real());
  const RealVector evs = hermitian_eigenvalues(m);
  if (evs(0) < kPsdFloor) throw NotPSD(evs(0));
  return DensityMatrix{m};
}

inline DensityMatrix maximally_mixed(int n) {
  if (n < 1) throw OutOfRange("dimension must be >= 1");
  return DensityMatrix{ComplexMatrix::Identity(n, n) / static_cast<double>(n)};
}

// Deterministic RNG.  std::normal_distribution is implementation-defined, so
// Gaussians are produced by an explicit Box-Muller transform; results are
// reproducible across platforms for a given seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  Cx complex_gaussian() {
    const double re = gaussian();
    return Cx(re, gaussian());
  }

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// splitmix64 finalizer; decorrelates per-restart seeds derived from one seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t x = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Random full-rank density matrix: G G^H / tr(G G^H) with i.i.d. complex
// Gaussian G.  Same seed, same matrix.
inline DensityMatrix sample_density(int n, std::uint64_t seed) {
  if (n < 2) throw OutOfRange("sample_density requires n >= 2");
  Rng rng(seed);
  ComplexMatrix g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = rng.complex_gaussian();
  ComplexMatrix w = g * g.adjoint();
  w /= w.trace().real();
  // Round off the anti-Hermitian dust so the result passes validation exactly.
  w = ((w + w.adjoint()) / 2.0).eval();
  return validate_density(w);
}

// Haar-ish random unitary (QR of a Ginibre draw with phase-fixed diagonal).
// Used by tests for invariance properties; determinism matters, exact Haar
// measure does not.
inline ComplexMatrix random_unitary(int n, Rng& rng) {
  ComplexMatrix g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = rng.complex_gaussian();
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ();
  const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j) {
    const Cx d = r(j, j);
    const double ad = std::abs(d);
    if (ad > 0.0) q.col(j) *= d / ad;
  }
  return q;
}

}  // namespace qmet
