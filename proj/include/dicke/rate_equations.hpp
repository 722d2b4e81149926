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

#ifndef DICKE__RATE_EQUATIONS_HPP_
#define DICKE__RATE_EQUATIONS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "dicke/errors.hpp"
#include "dicke/ode.hpp"
#include "dicke/steady_state.hpp"
#include "dicke/system.hpp"

namespace dicke
{

/// Population rate equations on the occupation lattice,
///   dp_n/dt = -Lambda(n) p_n + sum_alpha Gamma_alpha (m + 1) n_alpha p_{n - e_alpha},
/// integrated in double precision as an independent check of the closed form.
class RateEquationSystem
{
public:
  /// Dense generators are never formed; this only bounds `generator()`.
  static constexpr std::size_t kDenseLimit = 100'000;

  explicit RateEquationSystem(const SystemSpec & spec, std::size_t lattice_cap = 2'000'000)
  : spec_(spec), lattice_(std::make_shared<const Lattice>(spec, lattice_cap))
  {
    const std::size_t d = spec.n_channels();
    const std::size_t size = lattice_->size();
    loss_.resize(size);
    gains_.assign(size * d, 0.0);
    for (std::size_t i = 0; i < size; ++i) {
      auto s = lattice_->state(i);
      const unsigned m = lattice_->excitations(i);
      double w = 0.0;
      for (std::size_t a = 0; a < d; ++a) {
        const double g = spec.channel(a).to_double();
        w += g * (s[a] + 1.0);
        if (lattice_->predecessor(i, a) != Lattice::kNone) {
          gains_[i * d + a] = g * (m + 1.0) * s[a];
        }
      }
      loss_[i] = m * w;
    }
  }

  const SystemSpec & spec() const noexcept {return spec_;}
  const Lattice & lattice() const noexcept {return *lattice_;}
  std::size_t size() const noexcept {return lattice_->size();}

  /// Fully inverted initial condition.
  Eigen::VectorXd initial_state() const
  {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size()));
    y[0] = 1.0;
    return y;
  }

  void derivative(const Eigen::VectorXd & y, Eigen::VectorXd & dydt) const
  {
    const std::size_t d = spec_.n_channels();
    for (std::size_t i = 0; i < size(); ++i) {
      double v = -loss_[i] * y[static_cast<Eigen::Index>(i)];
      for (std::size_t a = 0; a < d; ++a) {
        const double g = gains_[i * d + a];
        if (g != 0.0) {
          v += g * y[static_cast<Eigen::Index>(lattice_->predecessor(i, a))];
        }
      }
      dydt[static_cast<Eigen::Index>(i)] = v;
    }
  }

  /// Sparse generator G with dp/dt = G p.
  Eigen::SparseMatrix<double> generator() const
  {
    if (size() > kDenseLimit) {
      throw ResourceError("rate equations: generator export limited to " +
              std::to_string(kDenseLimit) + " states");
    }
    const std::size_t d = spec_.n_channels();
    std::vector<Eigen::Triplet<double>> entries;
    for (std::size_t i = 0; i < size(); ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      entries.emplace_back(row, row, -loss_[i]);
      for (std::size_t a = 0; a < d; ++a) {
        if (gains_[i * d + a] != 0.0) {
          entries.emplace_back(
            row, static_cast<Eigen::Index>(lattice_->predecessor(i, a)), gains_[i * d + a]);
        }
      }
    }
    Eigen::SparseMatrix<double> g(static_cast<Eigen::Index>(size()),
      static_cast<Eigen::Index>(size()));
    g.setFromTriplets(entries.begin(), entries.end());
    return g;
  }

  /// True when no entry moves population toward more excitations: the
  /// generator is lower triangular in the lattice order and every gain
  /// comes from exactly one excitation more.
  bool is_triangular() const
  {
    auto g = generator();
    for (Eigen::Index col = 0; col < g.outerSize(); ++col) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(g, col); it; ++it) {
        if (it.row() == it.col()) {
          continue;
        }
        const auto from = static_cast<std::size_t>(it.col());
        const auto to = static_cast<std::size_t>(it.row());
        if (from > to || lattice_->excitations(from) != lattice_->excitations(to) + 1) {
          return false;
        }
      }
    }
    return true;
  }

private:
  SystemSpec spec_;
  std::shared_ptr<const Lattice> lattice_;
  std::vector<double> loss_;
  std::vector<double> gains_;
};

/// Populations at each time of `t_grid` (rows) for every lattice state
/// (columns, lattice order).
inline Eigen::MatrixXd integrate(
  const RateEquationSystem & system, const std::vector<double> & t_grid,
  const OdeOptions & opts = {}, OdeStats * stats = nullptr)
{
  if (!t_grid.empty() && t_grid.front() < 0.0) {
    throw ValidationError("integrate: times must be non-negative");
  }
  Eigen::MatrixXd out(static_cast<Eigen::Index>(t_grid.size()),
    static_cast<Eigen::Index>(system.size()));
  auto s = integrate_dopri5(
    [&](double, const Eigen::VectorXd & y, Eigen::VectorXd & dydt) {
      system.derivative(y, dydt);
    },
    0.0, system.initial_state(), t_grid,
    [&](std::size_t k, double, const Eigen::VectorXd & y) {
      out.row(static_cast<Eigen::Index>(k)) = y.transpose();
    },
    opts);
  if (stats) {
    *stats = s;
  }
  return out;
}

inline Eigen::MatrixXd integrate(
  const SystemSpec & spec, const std::vector<double> & t_grid, double rel_tol = 1e-10,
  double abs_tol = 1e-14)
{
  OdeOptions opts;
  opts.rel_tol = rel_tol;
  opts.abs_tol = abs_tol;
  return integrate(RateEquationSystem(spec), t_grid, opts);
}

/// Long-time limit of the rate equations restricted to the ground
/// configurations, integrated to t_end = 50 / (N Gamma_min) by default.
inline SteadyStateDistribution steady_state_by_integration(
  const SystemSpec & spec, double t_end = 0.0, const OdeOptions & opts = {})
{
  RateEquationSystem system(spec);
  if (!(t_end > 0.0)) {
    t_end = 50.0 / (spec.n_emitters() * spec.min_rate().to_double());
  }
  Eigen::VectorXd final_state;
  integrate_dopri5(
    [&](double, const Eigen::VectorXd & y, Eigen::VectorXd & dydt) {
      system.derivative(y, dydt);
    },
    0.0, system.initial_state(), std::vector<double>{t_end},
    [&](std::size_t, double, const Eigen::VectorXd & y) {final_state = y;}, opts);

  Eigen::VectorXd rate(final_state.size());
  system.derivative(final_state, rate);
  const double residual = rate.cwiseAbs().maxCoeff();
  if (!(residual < 1e-12)) {
    throw IntegratorError(
            "steady_state_by_integration: not stationary at t = " + std::to_string(t_end) +
            " (|dp/dt| = " + std::to_string(residual) + "); increase the horizon",
            residual);
  }

  const auto & lattice = system.lattice();
  auto [begin, end] = lattice.level(spec.n_emitters());
  SteadyStateDistribution out{spec, {}, {}};
  double total = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    total += final_state[static_cast<Eigen::Index>(i)];
  }
  for (std::size_t i = begin; i < end; ++i) {
    auto s = lattice.state(i);
    out.states.emplace_back(s.begin(), s.end());
    out.probabilities.push_back(final_state[static_cast<Eigen::Index>(i)] / total);
  }
  return out;
}

}  // namespace dicke

#endif  // DICKE__RATE_EQUATIONS_HPP_
