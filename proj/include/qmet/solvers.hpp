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
#include <deque>
#include <functional>

#include "qmet/forms.hpp"

namespace qmet::solvers {

// Levenberg-Marquardt on a FormSystem's split residuals.  The zero-residual
// sets here are smooth manifolds (orthonormality plus linear-in-overlap
// constraints), so close to a solution this converges quadratically and in
// practice bottoms out near machine precision.  That depth matters: several
// derived quantities scale like the square root of a residual entry, so
// stopping at the nominal tolerance would be far too coarse.  Callers treat
// the tolerance as an admission threshold, not a stopping rule.
struct LmOptions {
  int max_iters = 400;
  double stop_sum_sq = 1e-30;
  double lambda_init = 1e-3;
  double lambda_up = 10.0;
  double lambda_down = 0.2;
  double lambda_max = 1e14;
};

struct LmResult {
  std::vector<Cx> c;
  double sum_sq = 0.0;
  int iters = 0;
};

inline LmResult lm_solve(const forms::FormSystem& sys, std::vector<Cx> c0,
                         const LmOptions& opt = {}) {
  std::vector<Cx> c = std::move(c0);
  RealVector x = forms::pack(c);
  const int np = static_cast<int>(x.size());

  RealVector r;
  sys.residuals(c, r);
  double s = r.squaredNorm();
  double lambda = opt.lambda_init;
  RealMatrix jac;

  int iter = 0;
  for (; iter < opt.max_iters; ++iter) {
    if (s <= opt.stop_sum_sq) break;
    sys.jacobian(c, jac);
    const RealMatrix jtj = jac.transpose() * jac;
    const RealVector g = jac.transpose() * r;
    if (g.lpNorm<Eigen::Infinity>() < 1e-18) break;  // stationary, maybe non-zero residual

    // The zero set carries a large gauge group, so jtj is rank-deficient and
    // some diagonal entries sit at zero.  Scaling the damping by jtj(i,i)
    // alone would leave the null directions undamped; the solve then emits
    // garbage steps along them and the crawl never reaches the quadratic
    // phase.  Flooring the scale at the largest curvature keeps every
    // direction damped uniformly.
    const double dscale = jtj.diagonal().maxCoeff() + 1e-12;
    bool accepted = false;
    while (lambda <= opt.lambda_max) {
      RealMatrix a = jtj;
      for (int i = 0; i < np; ++i) a(i, i) += lambda * dscale;
      const RealVector step = a.ldlt().solve(-g);
      const RealVector x_try = x + step;
      const std::vector<Cx> c_try = forms::unpack(x_try);
      RealVector r_try;
      sys.residuals(c_try, r_try);
      const double s_try = r_try.squaredNorm();
      if (s_try < s) {
        x = x_try;
        c = c_try;
        r = r_try;
        s = s_try;
        lambda = std::max(lambda * opt.lambda_down, 1e-12);
        accepted = true;
        break;
      }
      lambda *= opt.lambda_up;
    }
    if (!accepted) break;  // no downhill step at any damping: converged as far as it goes
  }
  return LmResult{std::move(c), s, iter};
}

// Limited-memory BFGS with Armijo backtracking, for the smooth penalized
// objectives built by the optimizer.  fg must return f(x) and fill grad.
struct LbfgsOptions {
  int max_iters = 500;
  double grad_tol = 1e-10;
  double f_tol = 1e-12;  // relative flatness over successive accepted steps
  int history = 10;
};

struct LbfgsResult {
  RealVector x;
  double f = 0.0;
  int iters = 0;
};

template <class FG>
LbfgsResult lbfgs_minimize(FG&& fg, RealVector x0, const LbfgsOptions& opt = {}) {
  RealVector x = std::move(x0);
  RealVector grad(x.size());
  double f = fg(x, grad);

  std::deque<RealVector> s_hist, y_hist;
  std::deque<double> rho_hist;
  int flat_streak = 0;

  int iter = 0;
  for (; iter < opt.max_iters; ++iter) {
    if (grad.lpNorm<Eigen::Infinity>() <= opt.grad_tol) break;

    // Two-loop recursion.
    RealVector q = grad;
    const int hsz = static_cast<int>(s_hist.size());
    std::vector<double> alpha(hsz);
    for (int i = hsz - 1; i >= 0; --i) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(q);
      q -= alpha[i] * y_hist[i];
    }
    if (hsz > 0) {
      const double gamma =
          s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
      q *= gamma;
    }
    for (int i = 0; i < hsz; ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(q);
      q += (alpha[i] - beta) * s_hist[i];
    }
    RealVector dir = -q;
    double dg = dir.dot(grad);
    if (dg >= 0.0) {  // not a descent direction; drop history
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      dir = -grad;
      dg = -grad.squaredNorm();
    }

    // Armijo backtracking.
    double t = 1.0;
    const double c1 = 1e-4;
    RealVector x_new, grad_new(x.size());
    double f_new = f;
    bool ok = false;
    for (int bt = 0; bt < 50; ++bt) {
      x_new = x + t * dir;
      f_new = fg(x_new, grad_new);
      if (f_new <= f + c1 * t * dg) {
        ok = true;
        break;
      }
      t *= 0.5;
    }
    if (!ok) break;  // gradient is numerically unreliable at this scale

    const RealVector s_vec = x_new - x;
    const RealVector y_vec = grad_new - grad;
    const double sy = s_vec.dot(y_vec);
    if (sy > 1e-12 * s_vec.norm() * y_vec.norm()) {
      s_hist.push_back(s_vec);
      y_hist.push_back(y_vec);
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > opt.history) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }

    const double drop = f - f_new;
    x = x_new;
    grad = grad_new;
    f = f_new;
    flat_streak = (drop <= opt.f_tol * std::max(1.0, std::abs(f))) ? flat_streak + 1 : 0;
    if (flat_streak >= 3) break;
  }
  return LbfgsResult{std::move(x), f, iter};
}

}  // namespace qmet::solvers
