#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>
#include <vector>

#include <json.hpp>

#include "common.hpp"
#include "energies.hpp"
#include "radial.hpp"
#include "symmetrize.hpp"

namespace rearrange {

// kappa = 4^s Gamma(s + 2) Gamma(s + n/2) / Gamma(n/2)
inline double kappa(double s, int n) {
  if (!(s > 0.0 && s < 1.0)) throw Error(ErrorKind::Config, "s must lie in (0, 1)");
  if (n != 1 && n != 2) throw Error(ErrorKind::Config, "dimension must be 1 or 2");
  return std::pow(4.0, s) * std::tgamma(s + 2.0) * std::tgamma(s + 0.5 * n) / std::tgamma(0.5 * n);
}

struct RescalingExponents {
  double alpha = 0.0, beta = 0.0;
};

inline RescalingExponents barenblatt_exponents(int n, double s) {
  double d = n + 2.0 * (1.0 + s);
  return {n / d, 1.0 / d};
}

struct StationaryProfile {
  double lambda = 1.0, s = 0.5, kappa = 1.0;
  int n = 1;
  RadialProfile v;
  double mass = 0.0;
  double support_radius() const { return 1.0 / std::sqrt(lambda); }
};

// v(x) = lambda^(-s) kappa^(-1) (1 - lambda |x|^2)_+^(1 + s), sampled on
// [0, 1.25 lambda^(-1/2)] so that the support edge is a node when
// (count - 1) is a multiple of 5.
inline StationaryProfile explicit_solution(double lambda, double s, int n, std::size_t count = 4001) {
  if (!(lambda > 0.0)) throw Error(ErrorKind::Config, "lambda must be > 0");
  StationaryProfile p;
  p.lambda = lambda;
  p.s = s;
  p.n = n;
  p.kappa = kappa(s, n);
  double amp = std::pow(lambda, -s) / p.kappa;
  p.v = RadialProfile::sample(n, 1.25 / std::sqrt(lambda), count, [=](double r) {
    double q = 1.0 - lambda * r * r;
    return q > 0.0 ? amp * std::pow(q, 1.0 + s) : 0.0;
  });
  p.mass = p.v.mass();
  return p;
}

// v + amplitude * (1 - ((r - center) / width)^2)_+^3
inline RadialProfile perturb_profile(const RadialProfile& v, double amplitude, double center, double width) {
  auto w = v.samples();
  for (std::size_t i = 0; i < w.size(); ++i) {
    double u = (v.r(i) - center) / width, q = 1.0 - u * u;
    if (q > 0.0) w[i] += amplitude * q * q * q;
  }
  return RadialProfile(v.dim(), v.r_max(), std::move(w));
}

struct ResidualReport {
  double a = 0.0, b = 0.0;  // fit a + b r^2
  double residual = 0.0;    // max |fit - value| / max |value|
  double implied_beta = 0.0;  // -2 b
  std::vector<double> radii, values;
};

// (-Delta)^s v at `points` radii in [0, fraction * support radius] and the
// least-squares fit a + b r^2.
inline ResidualReport stationary_residual(const RadialProfile& v, double s, double support_radius, double fraction = 0.8,
                                          std::size_t points = 17) {
  if (!(fraction > 0.0 && fraction <= 0.8)) throw Error(ErrorKind::Config, "evaluation radii must stay within 0.8 of the support");
  if (points < 3) throw Error(ErrorKind::Config, "need at least 3 radii");
  ResidualReport r;
  for (std::size_t i = 0; i < points; ++i)
    r.radii.push_back(fraction * support_radius * static_cast<double>(i) / static_cast<double>(points - 1));
  r.values = frac_laplacian_radial(v, s, r.radii);
  double S0 = 0, S1 = 0, S2 = 0, T0 = 0, T1 = 0;
  for (std::size_t i = 0; i < points; ++i) {
    double x = r.radii[i] * r.radii[i], y = r.values[i];
    S0 += 1;
    S1 += x;
    S2 += x * x;
    T0 += y;
    T1 += x * y;
  }
  double det = S0 * S2 - S1 * S1;
  r.a = (T0 * S2 - T1 * S1) / det;
  r.b = (S0 * T1 - S1 * T0) / det;
  r.implied_beta = -2.0 * r.b;
  double worst = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < points; ++i) {
    double x = r.radii[i] * r.radii[i];
    worst = std::max(worst, std::fabs(r.a + r.b * x - r.values[i]));
    scale = std::max(scale, std::fabs(r.values[i]));
  }
  r.residual = worst / scale;
  return r;
}

inline ResidualReport stationary_residual(const StationaryProfile& p, double fraction = 0.8, std::size_t points = 17) {
  return stationary_residual(p.v, p.s, p.support_radius(), fraction, points);
}

// Labels the 4-connected components of {f > 0}; returns the label per sample
// (-1 outside the support) and the number of components.
inline std::pair<std::vector<long>, std::size_t> support_components(const GridFunction& f) {
  const auto& v = f.samples();
  std::vector<long> label(v.size(), -1);
  std::size_t nx = f.axes()[0].count, ny = f.dim() == 2 ? f.axes()[1].count : 1;
  std::size_t count = 0;
  for (std::size_t start = 0; start < v.size(); ++start) {
    if (v[start] <= 0.0 || label[start] >= 0) continue;
    std::deque<std::size_t> queue{start};
    label[start] = static_cast<long>(count);
    while (!queue.empty()) {
      std::size_t k = queue.front();
      queue.pop_front();
      std::size_t i = k / ny, j = k % ny;
      auto visit = [&](std::size_t q) {
        if (v[q] > 0.0 && label[q] < 0) {
          label[q] = static_cast<long>(count);
          queue.push_back(q);
        }
      };
      if (i > 0) visit(k - ny);
      if (i + 1 < nx) visit(k + ny);
      if (ny > 1 && j > 0) visit(k - 1);
      if (ny > 1 && j + 1 < ny) visit(k + 1);
    }
    ++count;
  }
  return {label, count};
}

inline std::vector<double> component_masses(const GridFunction& f, const std::vector<long>& label, std::size_t count) {
  double cell = 1.0;
  for (const auto& ax : f.axes()) cell *= ax.step();
  std::vector<KahanSum> m(count);
  for (std::size_t k = 0; k < label.size(); ++k)
    if (label[k] >= 0) m[static_cast<std::size_t>(label[k])] += f.samples()[k] * cell;
  std::vector<double> out;
  for (auto& x : m) out.push_back(x.value());
  return out;
}

struct DescentReport {
  std::vector<double> tau, energy, error_estimate;
  bool support_preserved = true;
  double max_component_mass_error = 0.0;  // relative
  bool strictly_decreasing = true;
  double min_decrement_ratio = std::numeric_limits<double>::infinity();  // decrement / (3 * error)
  double max_relative_change = 0.0;  // max |E(tau) - E(0)| / E(0)
  double fitted_slope = 0.0;         // least squares E(tau) - E(0) ~ slope * tau
};

// Thin-film energy along the truncated symmetrization.
inline DescentReport descent_experiment(const GridFunction& v, double s, double beta, double h0, const std::vector<double>& tau_grid,
                                        bool estimate_error = true) {
  DescentReport r;
  auto [label, count] = support_components(v);
  auto m0 = component_masses(v, label, count);
  for (double tau : tau_grid) {
    GridFunction vt = tau == 0.0 ? v : steiner_truncated(v, tau, h0).f;
    for (std::size_t k = 0; k < v.samples().size(); ++k)
      if ((v.samples()[k] > 0.0) != (vt.samples()[k] > 0.0)) r.support_preserved = false;
    auto m = component_masses(vt, label, count);
    for (std::size_t c = 0; c < count; ++c) r.max_component_mass_error = std::max(r.max_component_mass_error, std::fabs(m[c] / m0[c] - 1.0));
    auto e = thin_film_energy(vt, s, beta, estimate_error);
    r.tau.push_back(tau);
    r.energy.push_back(e.value);
    r.error_estimate.push_back(e.error_estimate);
  }
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < r.tau.size(); ++i) {
    double d = r.energy[i] - r.energy.front();
    r.max_relative_change = std::max(r.max_relative_change, std::fabs(d) / std::fabs(r.energy.front()));
    num += d * r.tau[i];
    den += r.tau[i] * r.tau[i];
    if (i > 0) {
      double dec = r.energy[i - 1] - r.energy[i];
      if (!(dec > 0.0)) r.strictly_decreasing = false;
      double err = std::max(r.error_estimate[i - 1], r.error_estimate[i]);
      r.min_decrement_ratio = std::min(r.min_decrement_ratio, err > 0.0 ? dec / (3.0 * err) : std::numeric_limits<double>::infinity());
    }
  }
  r.fitted_slope = den > 0.0 ? num / den : 0.0;
  return r;
}

// |[trunc]^2 - [cont]^2| / tau for the truncated and continuous
// symmetrizations of v at the same tau.
inline double truncation_gap(const GridFunction& v, double s, double tau, double h0) {
  double a = gagliardo(steiner_truncated(v, tau, h0).f, s, 2.0, false).value;
  double b = gagliardo(steiner_continuous(v, tau), s, 2.0, false).value;
  return std::fabs(a - b) / tau;
}

inline nlohmann::json to_json(const ResidualReport& r) {
  return {{"a", r.a}, {"b", r.b}, {"residual", r.residual}, {"implied_beta", r.implied_beta}, {"radii", r.radii}, {"values", r.values}};
}

inline nlohmann::json to_json(const DescentReport& r) {
  return {{"tau", r.tau},
          {"energy", r.energy},
          {"error_estimate", r.error_estimate},
          {"support_preserved", r.support_preserved},
          {"max_component_mass_error", r.max_component_mass_error},
          {"strictly_decreasing", r.strictly_decreasing},
          {"max_relative_change", r.max_relative_change},
          {"fitted_slope", r.fitted_slope}};
}

}  // namespace rearrange
