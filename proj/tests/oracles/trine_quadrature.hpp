// Copyright 2026 The qscmc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef QSCMC_TESTS_ORACLES_TRINE_QUADRATURE_HPP
#define QSCMC_TESTS_ORACLES_TRINE_QUADRATURE_HPP

// Independent quadrature oracle for the one-rebit trine target. Shares no code with the
// library: states are Bloch-disk points r = (x, z), rho = (1 + x sigma_x + z sigma_z) / 2,
// and the flat state measure is the area measure on the unit disk. The trine outcome k
// has direction n_k = (sin t_k, cos t_k), t_k = 2 pi k / 3, and p_k = (1 + n_k . r) / 3.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <utility>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

namespace qscmc::oracle {

class TrineDisk {
 public:
  explicit TrineDisk(std::array<double, 3> alpha) : alpha_(alpha) {
    for (int k = 0; k < 3; ++k) {
      const double t = 2.0 * std::numbers::pi * k / 3.0;
      nx_[k] = std::sin(t);
      nz_[k] = std::cos(t);
    }
    locate_peak();
  }

  double log_f(double x, double z) const {
    double value = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double p = (1.0 + nx_[k] * x + nz_[k] * z) / 3.0;
      if (alpha_[k] == 0.0) {
        continue;
      }
      if (!(p > 0.0)) {
        return -kInf;
      }
      value += alpha_[k] * std::log(p);
    }
    return value;
  }

  double log_peak() const { return log_peak_; }
  double peak_x() const { return peak_x_; }
  double peak_z() const { return peak_z_; }

  /// Target probability of the region f >= lambda F.
  double content(double lambda) const {
    if (total_mass_ == 0.0) {
      total_mass_ = mass(-kInf);
    }
    return mass(lambda > 0.0 ? std::log(lambda) : -kInf) / total_mass_;
  }

  /// Area fraction of the region f >= lambda F.
  double size(double lambda) const {
    return area(lambda > 0.0 ? std::log(lambda) : -kInf) / std::numbers::pi;
  }

  /// Integral of f / F over {log f - log F >= t} (area measure).
  double mass(double t) const {
    const auto [lo, hi] = x_range(t);
    if (!(hi > lo)) {
      return 0.0;
    }
    auto inner = [this, t](double x) {
      const auto chord_z = chord(x, t);
      if (!chord_z) {
        return 0.0;
      }
      auto integrand = [this, x](double z) {
        const double v = log_f(x, z) - log_peak_;
        return v == -kInf ? 0.0 : std::exp(v);
      };
      return integrate(integrand, chord_z->first, chord_z->second);
    };
    const double split = std::clamp(peak_x_, lo, hi);
    return integrate_outer(inner, lo, split) + integrate_outer(inner, split, hi);
  }

  /// Area of {log f - log F >= t}.
  double area(double t) const {
    const auto [lo, hi] = x_range(t);
    if (!(hi > lo)) {
      return 0.0;
    }
    auto length = [this, t](double x) {
      const auto chord_z = chord(x, t);
      return chord_z ? chord_z->second - chord_z->first : 0.0;
    };
    const double split = std::clamp(peak_x_, lo, hi);
    return integrate_outer(length, lo, split) + integrate_outer(length, split, hi);
  }

 private:
  static constexpr double kInf = std::numeric_limits<double>::infinity();

  template <typename F>
  static double integrate(F f, double a, double b) {
    if (!(b > a)) {
      return 0.0;
    }
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 12, 1e-11);
  }

  /// Outer integrals have square-root behaviour at the ends of the x range.
  template <typename F>
  static double integrate_outer(F f, double a, double b) {
    if (!(b > a)) {
      return 0.0;
    }
    boost::math::quadrature::tanh_sinh<double> rule(12);
    return rule.integrate(f, a, b, 1e-10);
  }

  template <typename F>
  static double golden_max(F f, double a, double b, double* arg) {
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - r * (b - a);
    double d = a + r * (b - a);
    double fc = f(c);
    double fd = f(d);
    for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
      if (fc < fd) {
        a = c;
        c = d;
        fc = fd;
        d = a + r * (b - a);
        fd = f(d);
      } else {
        b = d;
        d = c;
        fd = fc;
        c = b - r * (b - a);
        fc = f(c);
      }
    }
    *arg = 0.5 * (a + b);
    return f(*arg);
  }

  /// Root of g on [a, b] with g(a) >= 0 > g(b) (or the reverse); g is monotone there.
  template <typename G>
  static double bisect(G g, double inside, double outside) {
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (inside + outside);
      if (mid == inside || mid == outside) {
        break;
      }
      if (g(mid)) {
        inside = mid;
      } else {
        outside = mid;
      }
    }
    return inside;
  }

  void locate_peak() {
    const double total = alpha_[0] + alpha_[1] + alpha_[2];
    // Unconstrained mode: sum_k n_k n_k^T = (3/2) 1 and sum_k n_k = 0 give
    // r = 2 sum_k phat_k n_k.
    double x = 0.0;
    double z = 0.0;
    for (int k = 0; k < 3; ++k) {
      x += 2.0 * alpha_[k] / total * nx_[k];
      z += 2.0 * alpha_[k] / total * nz_[k];
    }
    if (x * x + z * z <= 1.0) {
      peak_x_ = x;
      peak_z_ = z;
      log_peak_ = log_f(x, z);
      return;
    }
    // Otherwise the concave maximum sits on the unit circle; scan, then refine.
    double best_phi = 0.0;
    double best = -kInf;
    for (int j = 0; j < 20000; ++j) {
      const double phi = 2.0 * std::numbers::pi * j / 20000.0;
      const double v = log_f(std::sin(phi), std::cos(phi));
      if (v > best) {
        best = v;
        best_phi = phi;
      }
    }
    const double step = 2.0 * std::numbers::pi / 20000.0;
    double phi = best_phi;
    golden_max([this](double p) { return log_f(std::sin(p), std::cos(p)); }, best_phi - step,
               best_phi + step, &phi);
    peak_x_ = std::sin(phi);
    peak_z_ = std::cos(phi);
    log_peak_ = log_f(peak_x_, peak_z_);
  }

  /// Largest value of log f - log F on the vertical chord at x, and where it occurs.
  double chord_max(double x, double* z_star) const {
    const double w = std::sqrt(std::max(0.0, 1.0 - x * x));
    return golden_max([this, x](double z) { return log_f(x, z) - log_peak_; }, -w, w, z_star);
  }

  std::optional<std::pair<double, double>> chord(double x, double t) const {
    const double w = std::sqrt(std::max(0.0, 1.0 - x * x));
    if (t == -kInf) {
      return std::make_pair(-w, w);
    }
    double z_star = 0.0;
    if (chord_max(x, &z_star) < t) {
      return std::nullopt;
    }
    auto inside = [this, x, t](double z) { return log_f(x, z) - log_peak_ >= t; };
    const double lo = inside(-w) ? -w : bisect(inside, z_star, -w);
    const double hi = inside(w) ? w : bisect(inside, z_star, w);
    return std::make_pair(lo, hi);
  }

  std::pair<double, double> x_range(double t) const {
    if (t == -kInf) {
      return {-1.0, 1.0};
    }
    auto inside = [this, t](double x) {
      double z = 0.0;
      return chord_max(x, &z) >= t;
    };
    const double lo = inside(-1.0) ? -1.0 : bisect(inside, peak_x_, -1.0);
    const double hi = inside(1.0) ? 1.0 : bisect(inside, peak_x_, 1.0);
    return {lo, hi};
  }

  std::array<double, 3> alpha_;
  std::array<double, 3> nx_{};
  std::array<double, 3> nz_{};
  double log_peak_ = 0.0;
  double peak_x_ = 0.0;
  double peak_z_ = 0.0;
  mutable double total_mass_ = 0.0;
};

}  // namespace qscmc::oracle

#endif  // QSCMC_TESTS_ORACLES_TRINE_QUADRATURE_HPP
