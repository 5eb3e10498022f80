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

#include <stdexcept>
#include <string>

namespace qmet {

// Base class for every domain error thrown by this library.  The CLI maps
// these to exit code 1, except BoundViolation which maps to exit code 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// --- state validation -------------------------------------------------------

class NotHermitian : public Error {
 public:
  explicit NotHermitian(double dev)
      : Error("matrix is not Hermitian (max |m - m^H| entry = " +
              std::to_string(dev) + ")"),
        deviation(dev) {}
  double deviation;
};

class TraceNotOne : public Error {
 public:
  explicit TraceNotOne(double tr)
      : Error("matrix trace is not 1 (trace = " + std::to_string(tr) + ")"),
        trace(tr) {}
  double trace;
};

class NotPSD : public Error {
 public:
  explicit NotPSD(double eig)
      : Error("matrix is not positive semidefinite (min eigenvalue = " +
              std::to_string(eig) + ")"),
        min_eigenvalue(eig) {}
  double min_eigenvalue;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

// --- channels ----------------------------------------------------------------

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidChannel : public Error {
 public:
  using Error::Error;
};

// Random draw produced (numerically) linearly dependent columns even after
// the retry budget.  Practically unreachable with continuous distributions.
class DegenerateDraw : public Error {
 public:
  using Error::Error;
};

// --- numerics ----------------------------------------------------------------

class StepTooSmall : public Error {
 public:
  using Error::Error;
};

class OutOfRange : public Error {
 public:
  using Error::Error;
};

// --- constraint satisfaction --------------------------------------------------

class Infeasible : public Error {
 public:
  enum class Reason {
    RestartBudget,  // no admissible point found within the restart budget
    DimensionRule,  // provably infeasible from dimension counting alone
  };

  Infeasible(Reason r, const std::string& what) : Error(what), reason(r) {}
  Reason reason;
};

// A certified upper bound was exceeded by more than the slack tolerance.
// This cannot happen for admissible channels unless the implementation is
// wrong, so it is a distinct, loud failure (CLI exit code 3).
class BoundViolation : public Error {
 public:
  BoundViolation(const std::string& what, double theoretical_, double achieved_)
      : Error(what), theoretical(theoretical_), achieved(achieved_) {}
  double theoretical;
  double achieved;
};

// --- two-state scenario --------------------------------------------------------

// The pair of states fails the cross relation rho_11*chi_12 == chi_11*rho_12,
// which is required for a channel transferring diagonal elements of both.
class CrossRelationViolated : public Error {
 public:
  using Error::Error;
};

class StatesCommute : public Error {
 public:
  using Error::Error;
};

class DegenerateStates : public Error {
 public:
  using Error::Error;
};

}  // namespace qmet
