#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "common.hpp"

namespace rearrange {

// K(r) = 1 / ((ell^2 + r^2)^((n + s p)/2) + eps).
struct KernelSpec {
  int n = 1;
  double s = 0.5;
  double p = 2.0;
  double eps = 1e-2;
  double ell = 0.0;

  double exponent() const { return n + s * p; }
  double operator()(double r) const {
    double q = ell * ell + r * r;
    return 1.0 / (std::pow(q, 0.5 * exponent()) + eps);
  }
  double derivative(double r) const {
    double q = ell * ell + r * r, b = exponent();
    if (q == 0.0) return 0.0;
    double d = std::pow(q, 0.5 * b) + eps;
    return -b * r * std::pow(q, 0.5 * b - 1.0) / (d * d);
  }
  auto key() const { return std::make_tuple(n, s, p, eps, ell); }
};

namespace detail {

template <class F>
double gk(F&& f, double a, double b, double tol = 1e-12) {
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 12, tol);
}

template <class F>
double gauss20(F&& f, double a, double b) {
  return boost::math::quadrature::gauss<double, 20>::integrate(f, a, b);
}

}  // namespace detail

// Tabulated antiderivatives of a kernel on a log-uniform grid with quintic
// Hermite interpolation:
//   Kbar(r)    = int_0^r K           (odd)
//   M(r)       = int_0^|r| xi K(xi)  (even)
//   Kbarbar(r) = int_0^r Kbar        (even)
class KernelTable {
 public:
  static constexpr double r_min = 1e-9;
  static constexpr double r_max = 1e4;
  static constexpr int per_decade = 128;

  explicit KernelTable(const KernelSpec& spec) : spec_(spec) {
    if (!(spec.eps > 0.0) && !(spec.ell > 0.0))
      throw Error(ErrorKind::Config, "kernel tables need eps > 0 or ell > 0");
    int decades = static_cast<int>(std::round(std::log10(r_max / r_min)));
    std::size_t count = static_cast<std::size_t>(decades * per_decade) + 1;
    r_.resize(count);
    kb_.resize(count);
    m_.resize(count);
    k_.resize(count);
    dk_.resize(count);
    for (std::size_t i = 0; i < count; ++i) r_[i] = r_min * std::pow(10.0, static_cast<double>(i) / per_decade);
    auto K = [this](double r) { return spec_(r); };
    auto rK = [this](double r) { return r * spec_(r); };
    kb_[0] = detail::gk(K, 0.0, r_[0]);
    m_[0] = detail::gk(rK, 0.0, r_[0]);
    KahanSum skb, sm;
    skb += kb_[0];
    sm += m_[0];
    for (std::size_t i = 0; i < count; ++i) {
      if (i > 0) {
        skb += detail::gauss20(K, r_[i - 1], r_[i]);
        sm += detail::gauss20(rK, r_[i - 1], r_[i]);
        kb_[i] = skb.value();
        m_[i] = sm.value();
      }
      k_[i] = spec_(r_[i]);
      dk_[i] = spec_.derivative(r_[i]);
    }
    double a = spec_.exponent();
    kinf_ = kb_.back() + std::pow(r_max, 1.0 - a) / (a - 1.0);
    minf_ = (a > 2.0) ? m_.back() + std::pow(r_max, 2.0 - a) / (a - 2.0) : std::numeric_limits<double>::infinity();
  }

  const KernelSpec& spec() const { return spec_; }
  double K(double r) const { return spec_(r); }

  double Kbar(double r) const {
    double x = std::fabs(r);
    return r < 0 ? -kbar_pos(x) : kbar_pos(x);
  }
  double M(double r) const { return m_pos(std::fabs(r)); }
  double Kbarbar(double r) const {
    double x = std::fabs(r);
    return x * kbar_pos(x) - m_pos(x);
  }
  double Kbar_inf() const { return kinf_; }
  double M_inf() const { return minf_; }
  // int_d^inf K and int_d^inf xi K for d >= 0.
  double tail(double d) const { return kinf_ - kbar_pos(d); }
  double tail_first_moment(double d) const { return minf_ - m_pos(d); }

 private:
  double kbar_pos(double x) const {
    if (x <= r_min) return spec_(0.0) * x;
    if (x >= r_max) return kinf_ - std::pow(x, 1.0 - spec_.exponent()) / (spec_.exponent() - 1.0);
    return hermite(x, kb_, [this](std::size_t i) { return k_[i]; }, [this](std::size_t i) { return dk_[i]; });
  }
  double m_pos(double x) const {
    if (x <= r_min) return 0.5 * spec_(0.0) * x * x;
    if (x >= r_max) {
      double a = spec_.exponent();
      if (a > 2.0) return minf_ - std::pow(x, 2.0 - a) / (a - 2.0);
      return m_.back() + detail::gk([this](double r) { return r * spec_(r); }, r_max, x);
    }
    return hermite(
        x, m_, [this](std::size_t i) { return r_[i] * k_[i]; }, [this](std::size_t i) { return k_[i] + r_[i] * dk_[i]; });
  }
  template <class D1, class D2>
  double hermite(double x, const std::vector<double>& f, D1 d1, D2 d2) const {
    double u = std::log10(x / r_min) * per_decade;
    std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(u), r_.size() - 2);
    double x0 = r_[i], x1 = r_[i + 1], h = x1 - x0;
    double t = (x - x0) / h;
    double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
    double h0 = 1 - 10 * t3 + 15 * t4 - 6 * t5, h1 = t - 6 * t3 + 8 * t4 - 3 * t5, h2 = 0.5 * (t2 - 3 * t3 + 3 * t4 - t5);
    double h5 = 10 * t3 - 15 * t4 + 6 * t5, h4 = -4 * t3 + 7 * t4 - 3 * t5, h3 = 0.5 * (t3 - 2 * t4 + t5);
    return h0 * f[i] + h1 * h * d1(i) + h2 * h * h * d2(i) + h3 * h * h * d2(i + 1) + h4 * h * d1(i + 1) + h5 * f[i + 1];
  }

  KernelSpec spec_;
  std::vector<double> r_, kb_, m_, k_, dk_;
  double kinf_ = 0.0, minf_ = 0.0;
};

// Shared, thread-safe cache keyed by the kernel parameters.
inline const KernelTable& kernel_table(const KernelSpec& spec) {
  static std::mutex mu;
  static std::map<std::tuple<int, double, double, double, double>, std::unique_ptr<KernelTable>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[spec.key()];
  if (!slot) slot = std::make_unique<KernelTable>(spec);
  return *slot;
}

// C_eps = 2 int_{R^n} W_eps.
inline double c_eps(int n, double s, double p, double eps) {
  const auto& t = kernel_table({n, s, p, eps, 0.0});
  if (n == 1) return 4.0 * t.Kbar_inf();
  return 4.0 * M_PI * t.M_inf();
}

}  // namespace rearrange
