// Copyright 2026 The dicke-trajectories Authors
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

#ifndef DICKE__CAVITY_HPP_
#define DICKE__CAVITY_HPP_

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "dicke/errors.hpp"
#include "dicke/ode.hpp"
#include "dicke/precision.hpp"
#include "dicke/rate_value.hpp"
#include "dicke/system.hpp"
#include "dicke/trajectory_solver.hpp"

namespace dicke
{

/// N emitters in the symmetric subspace coupled to one lossy cavity mode:
/// H = Delta a^dag a + g (a S^dag + a^dag S), jump operator sqrt(kappa) a.
struct CavityModel
{
  unsigned n_emitters = 1;
  double g = 1.0;
  double kappa = 10.0;
  double detuning = 0.0;
  unsigned fock_cutoff = 10;

  void validate() const
  {
    if (n_emitters < 1) {
      throw ValidationError("CavityModel: need at least one emitter");
    }
    if (!(g >= 0.0) || !(kappa > 0.0) || !std::isfinite(detuning)) {
      throw ValidationError("CavityModel: need g >= 0, kappa > 0 and finite detuning");
    }
    if (fock_cutoff < 1) {
      throw ValidationError("CavityModel: Fock cutoff must be at least 1");
    }
  }

  /// Bad-cavity regime flag (kappa at least ten times g); informational.
  bool bad_cavity() const noexcept {return kappa >= 10.0 * g;}

  std::size_t dimension() const noexcept
  {
    return static_cast<std::size_t>(n_emitters + 1) * (fock_cutoff + 1);
  }
};

struct EffectiveRates
{
  double gamma_eff;
  double lamb_shift;
};

/// Gamma = 4 g^2 kappa / (kappa^2 + 4 Delta^2), shift = 4 g^2 Delta / (kappa^2 + 4 Delta^2).
inline EffectiveRates effective_rates(const CavityModel & model)
{
  model.validate();
  const double denom = model.kappa * model.kappa + 4.0 * model.detuning * model.detuning;
  if (!std::isfinite(denom)) {
    return EffectiveRates{0.0, 0.0};
  }
  const double g2 = 4.0 * model.g * model.g;
  return EffectiveRates{g2 * model.kappa / denom, g2 * model.detuning / denom};
}

struct CavityTrace
{
  std::vector<double> times;
  std::vector<double> s_dag_s;
  std::vector<double> photon_number;
  /// |tr rho - 1| at each time.
  std::vector<double> trace_error;
  /// max |rho - rho^dag| at each time.
  std::vector<double> hermiticity_error;
  /// Population of the highest retained Fock level at each time.
  std::vector<double> tail_population;
};

struct CavityOptions
{
  std::size_t dimension_cap = 10'000;
  double tail_tolerance = 1e-6;
  OdeOptions ode{1e-9, 1e-12, 0.0, 50'000'000};
};

/// Lindblad evolution of the atoms-plus-cavity density matrix from all
/// emitters excited and the cavity empty.
inline CavityTrace simulate_full(
  const CavityModel & model, const std::vector<double> & t_grid, const CavityOptions & opts = {})
{
  using cplx = std::complex<double>;
  using SpMat = Eigen::SparseMatrix<cplx>;
  model.validate();
  const std::size_t dim = model.dimension();
  if (dim > opts.dimension_cap) {
    throw ResourceError("simulate_full: Hilbert dimension " + std::to_string(dim) +
            " exceeds the cap of " + std::to_string(opts.dimension_cap));
  }
  const unsigned n = model.n_emitters;
  const unsigned c = model.fock_cutoff;
  // H conserves m + k and the loss only lowers k, so from |N, 0> the state
  // never leaves the span of |m>|k> with m + k <= N; the rest of the
  // truncated space is dropped exactly.
  std::vector<Eigen::Index> index((n + 1) * (c + 1), -1);
  std::vector<std::pair<unsigned, unsigned>> basis;
  for (unsigned m = 0; m <= n; ++m) {
    for (unsigned k = 0; k <= c && m + k <= n; ++k) {
      index[m * (c + 1) + k] = static_cast<Eigen::Index>(basis.size());
      basis.emplace_back(m, k);
    }
  }
  const auto d = static_cast<Eigen::Index>(basis.size());
  auto idx = [&](unsigned m, unsigned k) {return index[m * (c + 1) + k];};

  // a |k> = sqrt(k) |k - 1>; g a S^dag |m, k> = g sqrt(k (m + 1)(N - m)) |m + 1, k - 1>
  std::vector<Eigen::Triplet<cplx>> a_t, h_t;
  for (auto [m, k] : basis) {
    if (k == 0) {
      continue;
    }
    a_t.emplace_back(idx(m, k - 1), idx(m, k), std::sqrt(double(k)));
    if (m < n) {
      const double amp = model.g * std::sqrt(double(k) * double(m + 1) * double(n - m));
      h_t.emplace_back(idx(m + 1, k - 1), idx(m, k), amp);
      h_t.emplace_back(idx(m, k), idx(m + 1, k - 1), amp);
    }
    h_t.emplace_back(idx(m, k), idx(m, k), model.detuning * double(k));
  }
  SpMat a(d, d), h(d, d);
  a.setFromTriplets(a_t.begin(), a_t.end());
  h.setFromTriplets(h_t.begin(), h_t.end());
  SpMat a_dag = a.adjoint();
  SpMat number = a_dag * a;
  // drho/dt = A rho + rho A^dag + kappa a rho a^dag, A = -i H - kappa/2 a^dag a
  SpMat drift = cplx(0.0, -1.0) * h - (0.5 * model.kappa) * number;
  SpMat drift_dag = drift.adjoint();

  Eigen::VectorXd sds_diag(d), photon_diag(d);
  std::vector<bool> at_cutoff(static_cast<std::size_t>(d));
  for (Eigen::Index i = 0; i < d; ++i) {
    auto [m, k] = basis[static_cast<std::size_t>(i)];
    sds_diag[i] = double(m) * double(n + 1 - m);
    photon_diag[i] = double(k);
    at_cutoff[static_cast<std::size_t>(i)] = k == c;
  }

  Eigen::VectorXcd rho0 = Eigen::VectorXcd::Zero(d * d);
  rho0[idx(n, 0) * d + idx(n, 0)] = 1.0;

  CavityTrace out;
  out.times = t_grid;
  auto rhs = [&](double, const Eigen::VectorXcd & y, Eigen::VectorXcd & dy) {
      Eigen::Map<const Eigen::MatrixXcd> r(y.data(), d, d);
      Eigen::Map<Eigen::MatrixXcd> dr(dy.data(), d, d);
      Eigen::MatrixXcd ra = r * a_dag;
      dr.noalias() = drift * r;
      dr.noalias() += r * drift_dag;
      dr.noalias() += model.kappa * (a * ra);
    };
  auto observe = [&](std::size_t, double, const Eigen::VectorXcd & y) {
      Eigen::Map<const Eigen::MatrixXcd> r(y.data(), d, d);
      double sds = 0.0, photons = 0.0, tail = 0.0;
      cplx tr = 0.0;
      for (Eigen::Index i = 0; i < d; ++i) {
        const double p = r(i, i).real();
        tr += r(i, i);
        sds += sds_diag[i] * p;
        photons += photon_diag[i] * p;
        if (at_cutoff[static_cast<std::size_t>(i)]) {
          tail += p;
        }
      }
      out.s_dag_s.push_back(sds);
      out.photon_number.push_back(photons);
      out.trace_error.push_back(std::abs(tr - 1.0));
      out.hermiticity_error.push_back((r - r.adjoint()).cwiseAbs().maxCoeff());
      out.tail_population.push_back(tail);
      if (tail > opts.tail_tolerance) {
        throw NumericalError("simulate_full: Fock cutoff " + std::to_string(c) +
                " too small (tail population " + std::to_string(tail) + ")");
      }
    };
  integrate_dopri5(rhs, 0.0, rho0, t_grid, observe, opts.ode);
  return out;
}

/// <S^dag S>(t) = sum_m m (N + 1 - m) p_m(t) of the effective single-channel
/// Dicke model with rate gamma (given as an exact rational).
inline std::vector<double> dicke_s_dag_s(
  unsigned n_emitters, const RateValue & gamma, const std::vector<double> & t_grid)
{
  SystemSpec spec(n_emitters, {gamma});
  auto table = solve_single_channel<real128>(spec);
  auto signal = intensity(table);
  signal *= real128(1) / gamma.template to<real128>();
  std::vector<double> out;
  out.reserve(t_grid.size());
  for (double t : t_grid) {
    out.push_back(to_double(evaluate(signal, t)));
  }
  return out;
}

struct CavityComparison
{
  double kappa_over_g;
  double gamma_eff;
  /// max_t |<S^dag S>_full - <S^dag S>_Dicke|
  double linf_deviation;
  /// linf_deviation / max_t <S^dag S>_Dicke
  double relative_deviation;
  double max_trace_error;
  double max_hermiticity_error;
  double max_tail_population;
  CavityTrace full;
  std::vector<double> dicke;
};

/// Full-versus-effective comparison on the grid Gamma_eff t in
/// [0, gamma_t_max] with `points` samples, for resonant coupling.
inline CavityComparison compare_with_dicke(
  const CavityModel & model, double gamma_t_max = 3.0, std::size_t points = 301,
  const CavityOptions & opts = {})
{
  if (model.detuning != 0.0) {
    throw ValidationError("compare_with_dicke: only the resonant case is simulated");
  }
  if (model.g <= 0.0) {
    throw ValidationError("compare_with_dicke: needs g > 0");
  }
  if (points < 2 || !(gamma_t_max > 0.0)) {
    throw ValidationError("compare_with_dicke: invalid time grid");
  }
  const auto rates = effective_rates(model);
  std::vector<double> grid(points);
  for (std::size_t i = 0; i < points; ++i) {
    grid[i] = gamma_t_max * double(i) / double(points - 1) / rates.gamma_eff;
  }
  CavityComparison out{};
  out.kappa_over_g = model.kappa / model.g;
  out.gamma_eff = rates.gamma_eff;
  out.full = simulate_full(model, grid, opts);
  out.dicke = dicke_s_dag_s(model.n_emitters, RateValue::from_double(rates.gamma_eff), grid);
  double peak = 0.0;
  for (std::size_t i = 0; i < points; ++i) {
    out.linf_deviation = std::max(out.linf_deviation, std::fabs(out.full.s_dag_s[i] - out.dicke[i]));
    peak = std::max(peak, out.dicke[i]);
    out.max_trace_error = std::max(out.max_trace_error, out.full.trace_error[i]);
    out.max_hermiticity_error =
      std::max(out.max_hermiticity_error, out.full.hermiticity_error[i]);
    out.max_tail_population = std::max(out.max_tail_population, out.full.tail_population[i]);
  }
  out.relative_deviation = out.linf_deviation / peak;
  return out;
}

/// compare_with_dicke for kappa = ratio * g over each ratio.
inline std::vector<CavityComparison> convergence_sweep(
  const CavityModel & base, const std::vector<double> & kappa_over_g, double gamma_t_max = 3.0,
  std::size_t points = 301, const CavityOptions & opts = {})
{
  std::vector<CavityComparison> out;
  for (double ratio : kappa_over_g) {
    CavityModel m = base;
    m.kappa = ratio * base.g;
    out.push_back(compare_with_dicke(m, gamma_t_max, points, opts));
  }
  return out;
}

}  // namespace dicke

#endif  // DICKE__CAVITY_HPP_
