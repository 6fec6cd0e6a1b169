#pragma once

// Closed-form constants of the three fluctuation regimes (Tracy-Widom,
// BBP, Gaussian) for the ASEP and the stochastic six-vertex model, and the
// parameter algebra relating (delta1, delta2) to (q, kappa).

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kpz/error.hpp"

namespace kpz {

struct SixVertexParams {
  double delta1 = 0.25;
  double delta2 = 0.5;

  double q() const { return delta1 / delta2; }
  double kappa() const { return (1.0 - delta1) / (1.0 - delta2); }

  void validate() const {
    detail::require(delta1 > 0.0 && delta1 < 1.0, "delta1 must lie in (0,1)");
    detail::require(delta2 > 0.0 && delta2 < 1.0, "delta2 must lie in (0,1)");
    detail::require(delta1 < delta2, "delta1 must be < delta2");
  }
};

struct AsepParams {
  double rateL = 0.5;
  double rateR = 1.5;

  double q() const { return rateL / rateR; }

  void validate() const {
    detail::require(rateL >= 0.0, "left rate must be >= 0");
    detail::require(rateR > rateL, "right rate must exceed the left rate");
  }
};

// Densities b_1..b_m of generalized step Bernoulli data. b_j = 1 is allowed for
// sampling; beta_j is then infinite and any formula that needs it rejects it.
struct BernoulliBoundary {
  std::vector<double> b;

  static BernoulliBoundary uniform(int m, double density) {
    return {std::vector<double>(static_cast<std::size_t>(m), density)};
  }

  int m() const { return static_cast<int>(b.size()); }

  void validate() const {
    for (double x : b) detail::require(x > 0.0 && x <= 1.0, "each b_j must lie in (0,1]");
  }

  double beta(int j) const {
    const double x = b.at(static_cast<std::size_t>(j));
    detail::require(x < 1.0, "beta_j is infinite for b_j = 1");
    return x / (1.0 - x);
  }

  std::vector<double> betas() const {
    std::vector<double> out;
    out.reserve(b.size());
    for (int j = 0; j < m(); ++j) out.push_back(beta(j));
    return out;
  }
};

enum class Model { Asep, SixVertex };
enum class Regime { TW, BBP, Gaussian };

inline std::string to_string(Model m) { return m == Model::Asep ? "asep" : "sixvertex"; }

inline std::string to_string(Regime r) {
  switch (r) {
    case Regime::TW: return "tw";
    case Regime::BBP: return "bbp";
    case Regime::Gaussian: return "gaussian";
  }
  return "?";
}

struct RegimeConstants {
  Model model = Model::SixVertex;
  double b = 0.5;
  double q = 0.0;
  double kappa = std::numeric_limits<double>::quiet_NaN();   // six-vertex only
  double Lambda = std::numeric_limits<double>::quiet_NaN();  // six-vertex only
  double theta = 0.0;
  double chi = 0.0;
};

struct CenterScale {
  double center = 0.0;
  double scale = 0.0;
};

inline RegimeConstants derive_six_vertex_constants(const SixVertexParams& p, double b) {
  p.validate();
  detail::require(b > 0.0 && b < 1.0, "density b must lie in (0,1)");
  RegimeConstants c;
  c.model = Model::SixVertex;
  c.b = b;
  c.q = p.q();
  c.kappa = p.kappa();
  c.Lambda = b + c.kappa * (1.0 - b);
  c.theta = c.Lambda * c.Lambda / c.kappa;
  c.chi = b * (1.0 - b);
  return c;
}

// Valid when R - L = 1; other normalizations are not rescaled.
inline RegimeConstants derive_asep_constants(const AsepParams& p, double b) {
  p.validate();
  detail::require(b > 0.0 && b < 1.0, "density b must lie in (0,1)");
  RegimeConstants c;
  c.model = Model::Asep;
  c.b = b;
  c.q = p.q();
  c.theta = 1.0 - 2.0 * b;
  c.chi = b * (1.0 - b);
  return c;
}

// The T^{1/3} formulas without the open-interval check. The BBP regime
// evaluates them on the characteristic line itself.
inline CenterScale asep_tw_formula(double eta) {
  const double m = std::pow((1.0 - eta) / 2.0, 2);
  const double f = std::pow((1.0 - eta * eta) / 4.0, 2.0 / 3.0);
  return {m, f};
}

inline CenterScale six_vertex_tw_formula(const RegimeConstants& c, double eta) {
  const double k = c.kappa;
  const double m = std::pow(std::sqrt(k) - std::sqrt(eta), 2) / (k - 1.0);
  const double f = std::pow(k, 1.0 / 6.0) * std::cbrt(std::pow(std::sqrt(k * eta) - 1.0, 2)) *
                   std::cbrt(std::pow(std::sqrt(k) - std::sqrt(eta), 2)) /
                   ((k - 1.0) * std::pow(eta, 1.0 / 6.0));
  return {m, f};
}

inline CenterScale asep_tw_scaling(double eta, double b) {
  detail::require(b > 0.0 && b < 1.0, "density b must lie in (0,1)");
  const double theta = 1.0 - 2.0 * b;
  detail::require(eta > theta && eta < 1.0, "TW regime needs theta < eta < 1");
  return asep_tw_formula(eta);
}

inline CenterScale asep_gaussian_scaling(double eta, double b) {
  detail::require(b > 0.0 && b < 1.0, "density b must lie in (0,1)");
  const double theta = 1.0 - 2.0 * b;
  const double chi = b * (1.0 - b);
  detail::require(eta > -b && eta < theta, "Gaussian regime needs -b < eta < theta");
  return {chi - b * eta, std::sqrt(chi) * std::sqrt(theta - eta)};
}

inline CenterScale six_vertex_scalings(const RegimeConstants& c, double eta, Regime regime) {
  detail::require(c.model == Model::SixVertex, "six-vertex constants required");
  switch (regime) {
    case Regime::TW:
      detail::require(eta > c.theta && eta < c.kappa, "TW regime needs theta < eta < kappa");
      return six_vertex_tw_formula(c, eta);
    case Regime::Gaussian:
      detail::require(eta > c.theta / c.Lambda && eta < c.theta,
                      "Gaussian regime needs theta/Lambda < eta < theta");
      return {c.b - c.b * eta / c.Lambda, std::sqrt(c.chi * (1.0 - eta / c.theta))};
    case Regime::BBP:
      break;
  }
  throw DomainError("BBP scaling is evaluated through six_vertex_tw_formula at eta_T");
}

// Shifts c_j of the BBP limit. `drift` is d (slope drift), `column_drifts`
// holds d_j. Scale factors are taken at eta = theta.
inline std::vector<double> bbp_shifts(const RegimeConstants& c, double drift,
                                      std::span<const double> column_drifts) {
  std::vector<double> out;
  out.reserve(column_drifts.size());
  if (c.model == Model::Asep) {
    const double f = asep_tw_formula(c.theta).scale;
    for (double dj : column_drifts) out.push_back(-f * (2.0 * dj + drift) / (2.0 * c.chi));
  } else {
    const double f = six_vertex_tw_formula(c, c.theta).scale;
    const double k = c.kappa;
    for (double dj : column_drifts)
      out.push_back(-f * dj / c.chi - k * f * drift / (2.0 * (k - 1.0) * c.chi * c.Lambda));
  }
  return out;
}

}  // namespace kpz
