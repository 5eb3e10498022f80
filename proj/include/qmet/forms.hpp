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

#include <vector>

#include "qmet/channel.hpp"
#include "qmet/core.hpp"

namespace qmet::forms {

// Every quantity this library optimizes or constrains is a sesquilinear form
// in the channel amplitudes,
//
//     q(c) = sum_t coeff_t * conj(c_bra_t) * c_ket_t ,
//
// (isometry overlaps, transfer-tensor entries, memory-matrix entries, ...).
// Representing them explicitly buys exact Wirtinger gradients and
// Gauss-Newton Jacobians for free, which the solvers below rely on.

struct Layout {
  int n = 0;
  int dc = 1;
  int dim() const { return n * n * n * dc; }
  int idx(int p, int k, int l, int m) const { return ((p * n + k) * n + l) * dc + m; }
};

struct Term {
  int bra;  // conjugated amplitude
  int ket;
  Cx coeff;
};

struct Form {
  std::vector<Term> terms;
  Cx target{0.0, 0.0};
};

class FormSystem {
 public:
  FormSystem() = default;
  explicit FormSystem(Layout lay) : layout_(lay) {}

  const Layout& layout() const { return layout_; }
  int form_count() const { return static_cast<int>(forms_.size()); }
  const std::vector<Form>& forms() const { return forms_; }

  void add(Form f) { forms_.push_back(std::move(f)); }

  void append(const FormSystem& other) {
    if (other.layout_.n != layout_.n || other.layout_.dc != layout_.dc)
      throw ShapeMismatch("cannot merge form systems over different layouts");
    forms_.insert(forms_.end(), other.forms_.begin(), other.forms_.end());
  }

  static Cx value(const Form& f, const std::vector<Cx>& c) {
    Cx s(0.0, 0.0);
    for (const Term& t : f.terms) s += t.coeff * std::conj(c[t.bra]) * c[t.ket];
    return s;
  }

  // sum_j |q_j(c) - target_j|^2
  double sum_sq(const std::vector<Cx>& c) const {
    double s = 0.0;
    for (const Form& f : forms_) s += std::norm(value(f, c) - f.target);
    return s;
  }

  // g += scale * d(sum_sq)/d(conj(c)).  With d_j = q_j - target_j,
  //   d(sum_sq)/d(conj(c_g)) = sum_j [ conj(d_j) * sum_{t: bra=g} coeff_t c_ket
  //                                  + d_j * sum_{t: ket=g} conj(coeff_t) c_bra ].
  void add_conj_gradient(const std::vector<Cx>& c, double scale, std::vector<Cx>& g) const {
    for (const Form& f : forms_) {
      const Cx d = value(f, c) - f.target;
      const Cx dconj = std::conj(d);
      for (const Term& t : f.terms) {
        g[t.bra] += scale * dconj * t.coeff * c[t.ket];
        g[t.ket] += scale * d * std::conj(t.coeff) * c[t.bra];
      }
    }
  }

  // Residuals split into real and imaginary parts: r(2j) = Re d_j, r(2j+1) = Im d_j.
  void residuals(const std::vector<Cx>& c, RealVector& r) const {
    r.resize(2 * form_count());
    for (int j = 0; j < form_count(); ++j) {
      const Cx d = value(forms_[j], c) - forms_[j].target;
      r(2 * j) = d.real();
      r(2 * j + 1) = d.imag();
    }
  }

  // Jacobian of the split residuals with respect to the packed real
  // parameters x = [Re c; Im c].  For c_g = x_g + i y_g,
  //   dd_j/dx_g = A + B,  dd_j/dy_g = i (A - B),
  // where A = sum_{t: ket=g} coeff_t conj(c_bra) and B = sum_{t: bra=g} coeff_t c_ket.
  void jacobian(const std::vector<Cx>& c, RealMatrix& jac) const {
    const int np = layout_.dim();
    jac.setZero(2 * form_count(), 2 * np);
    for (int j = 0; j < form_count(); ++j) {
      for (const Term& t : forms_[j].terms) {
        const Cx a = t.coeff * std::conj(c[t.bra]);  // via ket slot
        const Cx b = t.coeff * c[t.ket];             // via bra slot
        // d/dx contributions: A + B
        jac(2 * j, t.ket) += a.real();
        jac(2 * j + 1, t.ket) += a.imag();
        jac(2 * j, t.bra) += b.real();
        jac(2 * j + 1, t.bra) += b.imag();
        // d/dy contributions: i*A - i*B
        jac(2 * j, np + t.ket) += -a.imag();
        jac(2 * j + 1, np + t.ket) += a.real();
        jac(2 * j, np + t.bra) += b.imag();
        jac(2 * j + 1, np + t.bra) += -b.real();
      }
    }
  }

 private:
  Layout layout_{};
  std::vector<Form> forms_;
};

// Orthonormality of the channel columns: one form per ordered pair (p, r)
// with p <= r,  sum_{k,l,m} conj(c[p,k,l,m]) c[r,k,l,m] = delta_pr.
// The p > r half is the complex conjugate and adds nothing.
inline FormSystem isometry_system(int n, int dc) {
  Layout lay{n, dc};
  FormSystem sys(lay);
  for (int p = 0; p < n; ++p)
    for (int r = p; r < n; ++r) {
      Form f;
      f.target = (p == r) ? Cx(1.0, 0.0) : Cx(0.0, 0.0);
      f.terms.reserve(static_cast<std::size_t>(n) * n * dc);
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          for (int m = 0; m < dc; ++m)
            f.terms.push_back({lay.idx(p, k, l, m), lay.idx(r, k, l, m), Cx(1.0, 0.0)});
      sys.add(std::move(f));
    }
  return sys;
}

// All n^2 entries of theta(a, c) as zero-target forms, so sum_sq equals
// ||theta(a, c)||^2.  a, c are 1-based.
inline FormSystem theta_entry_system(int n, int dc, int a, int c) {
  if (a < 1 || a > n || c < 1 || c > n) throw OutOfRange("element index out of range");
  Layout lay{n, dc};
  FormSystem sys(lay);
  for (int k = 0; k < n; ++k)
    for (int nn = 0; nn < n; ++nn) {
      Form f;
      f.terms.reserve(static_cast<std::size_t>(n) * dc);
      for (int l = 0; l < n; ++l)
        for (int m = 0; m < dc; ++m)
          f.terms.push_back({lay.idx(a - 1, nn, l, m), lay.idx(c - 1, k, l, m), Cx(1.0, 0.0)});
      sys.add(std::move(f));
    }
  return sys;
}

// ChannelSpec <-> solver parameter conversions.  The amplitude layout and the
// form layout are bit-identical, so these are straight copies.
inline std::vector<Cx> to_params(const ChannelSpec& ch) { return ch.c; }

inline ChannelSpec from_params(int n, int dc, const std::vector<Cx>& params) {
  ChannelSpec ch = ChannelSpec::zeros(n, dc);
  if (params.size() != ch.c.size()) throw ShapeMismatch("parameter vector has wrong size");
  ch.c = params;
  return ch;
}

inline RealVector pack(const std::vector<Cx>& c) {
  const int np = static_cast<int>(c.size());
  RealVector x(2 * np);
  for (int i = 0; i < np; ++i) {
    x(i) = c[i].real();
    x(np + i) = c[i].imag();
  }
  return x;
}

inline std::vector<Cx> unpack(const RealVector& x) {
  const int np = static_cast<int>(x.size()) / 2;
  std::vector<Cx> c(np);
  for (int i = 0; i < np; ++i) c[i] = Cx(x(i), x(np + i));
  return c;
}

}  // namespace qmet::forms
