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

// dicke: command-line front end. Every subcommand writes one CSV or JSON
// document whose header echoes the resolved configuration.

#include <cmath>
#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dicke/cavity.hpp"
#include "dicke/check/verify_suite.hpp"
#include "dicke/errors.hpp"
#include "dicke/io.hpp"
#include "dicke/meanfield.hpp"
#include "dicke/precision.hpp"
#include "dicke/steady_state.hpp"
#include "dicke/stochastic.hpp"
#include "dicke/system.hpp"
#include "dicke/trajectory_solver.hpp"

namespace
{

using dicke::RateValue;
using dicke::SystemSpec;

struct Common
{
  std::string format = "csv";
  std::string output = "-";
  std::string precision = "auto";
  unsigned threads = 1;
};

struct SystemArgs
{
  unsigned n = 10;
  std::string rates;
  std::string ratio;
};

struct GridArgs
{
  double t_min = -1.0;
  double t_max = -1.0;
  std::size_t points = 200;
  std::string scale = "linear";
};

std::vector<std::string> split(const std::string & text, char sep = ',')
{
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (!item.empty()) {
      out.push_back(item);
    }
  }
  return out;
}

std::vector<RateValue> parse_rates(const std::string & text)
{
  std::vector<RateValue> out;
  for (const auto & s : split(text)) {
    out.push_back(RateValue::from_decimal(s));
  }
  if (out.empty()) {
    throw dicke::ValidationError("--rates needs at least one value");
  }
  return out;
}

SystemSpec make_spec(const SystemArgs & a)
{
  if (!a.rates.empty() && !a.ratio.empty()) {
    throw dicke::ValidationError("give either --rates or --ratio, not both");
  }
  if (!a.ratio.empty()) {
    return SystemSpec::two_channel(a.n, RateValue::from_decimal(a.ratio));
  }
  return SystemSpec(a.n, parse_rates(a.rates.empty() ? "1" : a.rates));
}

template<class T>
std::vector<T> parse_list(const std::string & text, const char * what)
{
  std::vector<T> out;
  for (const auto & s : split(text)) {
    try {
      std::size_t used = 0;
      if constexpr (std::is_same_v<T, unsigned>) {
        const long v = std::stol(s, &used);
        if (v < 0) {
          throw std::invalid_argument(s);
        }
        out.push_back(static_cast<unsigned>(v));
      } else {
        out.push_back(std::stod(s, &used));
      }
      if (used != s.size()) {
        throw std::invalid_argument(s);
      }
    } catch (const std::logic_error &) {
      throw dicke::ValidationError(std::string("cannot parse ") + what + " entry '" + s + "'");
    }
  }
  if (out.empty()) {
    throw dicke::ValidationError(std::string(what) + " is empty");
  }
  return out;
}

/// lo:hi:count, inclusive on both ends.
std::vector<double> parse_range(const std::string & text, const char * what)
{
  auto parts = split(text, ':');
  if (parts.size() != 3) {
    throw dicke::ValidationError(std::string(what) + " must look like lo:hi:count");
  }
  const double lo = parse_list<double>(parts[0], what).front();
  const double hi = parse_list<double>(parts[1], what).front();
  const unsigned count = parse_list<unsigned>(parts[2], what).front();
  if (count < 1 || hi < lo) {
    throw dicke::ValidationError(std::string(what) + " needs hi >= lo and count >= 1");
  }
  std::vector<double> out(count);
  for (unsigned i = 0; i < count; ++i) {
    out[i] = count == 1 ? lo : lo + (hi - lo) * double(i) / double(count - 1);
  }
  return out;
}

std::vector<double> make_grid(const GridArgs & g, const SystemSpec & spec)
{
  const double n = spec.n_emitters();
  const double t_max = g.t_max > 0.0 ? g.t_max :
    6.0 * std::log(n + 1.0) / (n * spec.min_rate().to_double());
  if (g.points < 2) {
    throw dicke::ValidationError("--t-points must be at least 2");
  }
  std::vector<double> out(g.points);
  if (g.scale == "linear") {
    const double t_min = g.t_min >= 0.0 ? g.t_min : 0.0;
    if (!(t_max > t_min)) {
      throw dicke::ValidationError("--t-max must exceed --t-min");
    }
    for (std::size_t i = 0; i < g.points; ++i) {
      out[i] = t_min + (t_max - t_min) * double(i) / double(g.points - 1);
    }
  } else if (g.scale == "log") {
    const double t_min = g.t_min > 0.0 ? g.t_min : 1e-3 / (n * spec.max_rate().to_double());
    if (!(t_max > t_min)) {
      throw dicke::ValidationError("--t-max must exceed --t-min");
    }
    const double span = std::log(t_max / t_min);
    for (std::size_t i = 0; i < g.points; ++i) {
      out[i] = t_min * std::exp(span * double(i) / double(g.points - 1));
    }
  } else {
    throw dicke::ValidationError("--t-scale must be linear or log");
  }
  return out;
}

template<class Fn>
dicke::io::Document at_precision(const Common & c, unsigned n, Fn && fn)
{
  if (c.precision == "auto") {
    return dicke::with_escalating_precision(
      dicke::default_precision_bits(n), fn, [](int from, int to) {
        std::cerr << "precision " << from << " bits insufficient, retrying at " << to << '\n';
      });
  }
  return dicke::dispatch_precision(parse_list<unsigned>(c.precision, "--precision").front(), fn);
}

void echo_common(dicke::io::Document & doc, const Common & c)
{
  doc.echo("precision", c.precision);
  doc.echo("threads", c.threads);
}

void echo_spec(dicke::io::Document & doc, const SystemSpec & spec)
{
  doc.echo("n", spec.n_emitters());
  std::string rates;
  for (std::size_t a = 0; a < spec.n_channels(); ++a) {
    rates += (a ? ";" : "") + spec.channel(a).str();
  }
  doc.echo("rates", rates);
}

std::string state_label(std::span<const unsigned> s)
{
  std::string out = "p";
  for (unsigned v : s) {
    out += "_" + std::to_string(v);
  }
  return out;
}

// ---------------------------------------------------------------- dynamics

struct DynamicsArgs
{
  SystemArgs sys;
  GridArgs grid;
  std::string populations = "auto";
  bool expressions = false;
};

dicke::io::Document run_dynamics(const Common & c, const DynamicsArgs & a)
{
  const auto spec = make_spec(a.sys);
  const auto grid = make_grid(a.grid, spec);
  dicke::SolverOptions solver;
  solver.threads = c.threads;
  return at_precision(c, spec.n_emitters(), [&]<class Real>() {
      dicke::io::Document doc;
      doc.command = "dynamics";
      echo_spec(doc, spec);
      echo_common(doc, c);
      doc.echo("precision_bits_used", dicke::precision_bits_v<Real>);
      doc.echo("t_scale", a.grid.scale);
      doc.echo("t_points", grid.size());

      auto table = dicke::solve<Real>(spec, solver);
      const std::size_t d = spec.n_channels();
      const unsigned n = spec.n_emitters();
      doc.echo("error_bound", table.error_bound());

      std::string mode = a.populations;
      if (mode == "auto") {
        mode = dicke::lattice_size(n, d) <= 64 ? "states" : "levels";
      }
      doc.echo("populations", mode);
      if (mode == "states") {
        dicke::Lattice lattice(spec);
        std::vector<std::string> cols{"t"};
        std::vector<dicke::ExpPolySum<Real>> signals;
        for (std::size_t i = 0; i < lattice.size(); ++i) {
          auto s = lattice.state(i);
          cols.push_back(state_label(s));
          signals.push_back(table.population(dicke::OccupationState(spec, {s.begin(), s.end()})));
        }
        auto & t = doc.add_table("populations", cols);
        for (double time : grid) {
          std::vector<std::string> row{dicke::io::format(time)};
          for (const auto & p : signals) {
            row.push_back(dicke::io::format(dicke::to_double(dicke::evaluate(p, time))));
          }
          t.add_row(std::move(row));
        }
        if (a.expressions) {
          for (std::size_t i = 0; i < lattice.size(); ++i) {
            doc.attachments[cols[i + 1]] = dicke::to_json(signals[i]);
          }
        }
      } else if (mode == "levels") {
        std::vector<std::string> cols{"t"};
        std::vector<dicke::ExpPolySum<Real>> signals;
        for (unsigned m = n + 1; m-- > 0; ) {
          cols.push_back("level_m" + std::to_string(m));
          signals.push_back(table.level_population(m));
        }
        auto & t = doc.add_table("level_populations", cols);
        for (double time : grid) {
          std::vector<std::string> row{dicke::io::format(time)};
          for (const auto & p : signals) {
            row.push_back(dicke::io::format(dicke::to_double(dicke::evaluate(p, time))));
          }
          t.add_row(std::move(row));
        }
      } else if (mode != "none") {
        throw dicke::ValidationError("--populations must be auto, states, levels or none");
      }

      std::vector<std::string> cols{"t"};
      std::vector<dicke::ExpPolySum<Real>> signals;
      for (std::size_t ch = 0; ch < d; ++ch) {
        cols.push_back("I_" + std::to_string(ch + 1));
        signals.push_back(dicke::intensity(table, ch));
      }
      cols.push_back("I_total");
      signals.push_back(dicke::intensity(table));
      auto & it = doc.add_table("intensity", cols);
      for (double time : grid) {
        std::vector<std::string> row{dicke::io::format(time)};
        for (const auto & s : signals) {
          row.push_back(dicke::io::format(dicke::to_double(dicke::evaluate(s, time))));
        }
        it.add_row(std::move(row));
      }
      for (std::size_t k = 0; k < signals.size(); ++k) {
        doc.attachments[cols[k + 1]] = dicke::to_json(signals[k]);
      }

      auto & peaks = doc.add_table("peaks", {"channel", "t_peak", "value", "burst"});
      for (std::size_t ch = 0; ch <= d; ++ch) {
        auto pk = dicke::find_peak(signals[ch], spec);
        if (ch < d) {
          peaks.add_row(cols[ch + 1], pk.time, pk.value, dicke::burst_predicate(spec, ch));
        } else {
          peaks.add_row(std::string("total"), pk.time, pk.value, std::string(""));
        }
      }
      return doc;
    });
}

// ------------------------------------------------------------------ steady

struct SteadyArgs
{
  SystemArgs sys;
  double step = 1e-4;
  std::string r_grid;
};

dicke::io::Document run_steady(const Common & c, const SteadyArgs & a)
{
  if (a.sys.rates.empty()) {
    const RateValue r = RateValue::from_decimal(a.sys.ratio.empty() ? "1" : a.sys.ratio);
    const unsigned n = a.sys.n;
    dicke::io::Document doc;
    doc.command = "steady";
    doc.echo("n", n);
    doc.echo("ratio", r.str());
    doc.echo("susceptibility_step", a.step);
    echo_common(doc, c);
    auto dist = dicke::steady_state_two_channel(n, r);
    auto & t = doc.add_table("distribution", {"x", "n1", "n2", "probability"});
    for (unsigned x = 0; x <= n; ++x) {
      t.add_row(x, n - x, x, dist.probabilities[x]);
    }
    auto op = dicke::order_parameter(n, r, a.step);
    auto & o = doc.add_table("order_parameter",
        {"n", "r", "n_bar_2", "susceptibility", "independent_n_bar_2"});
    o.add_row(n, op.ratio, op.n_bar_2, op.susceptibility,
      dicke::independent_order_parameter(op.ratio));
    if (!a.r_grid.empty()) {
      doc.echo("r_grid", a.r_grid);
      auto & s = doc.add_table("sweep", {"r", "n_bar_2", "susceptibility"});
      for (double rv : parse_range(a.r_grid, "--r-grid")) {
        auto p = dicke::order_parameter(n, RateValue::from_double(rv), a.step);
        s.add_row(rv, p.n_bar_2, p.susceptibility);
      }
    }
    return doc;
  }

  const auto spec = make_spec(a.sys);
  dicke::SolverOptions solver;
  solver.threads = c.threads;
  return at_precision(c, spec.n_emitters(), [&]<class Real>() {
      dicke::io::Document doc;
      doc.command = "steady";
      echo_spec(doc, spec);
      echo_common(doc, c);
      doc.echo("precision_bits_used", dicke::precision_bits_v<Real>);
      auto dist = dicke::steady_state_general<Real>(spec, solver);
      std::vector<std::string> cols;
      for (std::size_t ch = 0; ch < spec.n_channels(); ++ch) {
        cols.push_back("n" + std::to_string(ch + 1));
      }
      cols.push_back("probability");
      auto & t = doc.add_table("distribution", cols);
      for (std::size_t j = 0; j < dist.states.size(); ++j) {
        std::vector<std::string> row;
        for (unsigned v : dist.states[j]) {
          row.push_back(dicke::io::format(v));
        }
        row.push_back(dicke::io::format(dist.probabilities[j]));
        t.add_row(std::move(row));
      }
      return doc;
    });
}

// ----------------------------------------------------------------- scaling

struct ScalingArgs
{
  std::string n_list = "150";
  std::string d_list = "1,2,4,8";
};

dicke::io::Document run_scaling(const Common & c, const ScalingArgs & a)
{
  dicke::io::Document doc;
  doc.command = "scaling";
  doc.echo("n_list", a.n_list);
  doc.echo("d_list", a.d_list);
  echo_common(doc, c);
  auto & t = doc.add_table("scaling",
      {"n", "d", "I_max", "I_max_predicted", "I_max_rel_err", "t_peak", "t_peak_predicted",
        "t_peak_rel_err", "burst", "precision_bits_used"});
  dicke::SolverOptions solver;
  solver.threads = c.threads;
  for (unsigned n : parse_list<unsigned>(a.n_list, "--n")) {
    for (unsigned d : parse_list<unsigned>(a.d_list, "--d")) {
      const auto spec = SystemSpec::balanced(n, d);
      auto row = at_precision(c, n, [&]<class Real>() {
            auto table = dicke::solve<Real>(spec, solver);
            auto pk = dicke::find_peak(dicke::intensity(table), spec);
            auto pred = dicke::balanced_scaling_prediction(n, d);
            dicke::io::Document r;
            r.add_table("row", {"a", "b", "c", "d", "e", "f"}).add_row(
              pk.value, pred.peak_intensity, pk.time, pred.peak_time,
              dicke::burst_predicate(spec, 0), dicke::precision_bits_v<Real>);
            return r;
          }).tables[0].rows[0];
      const double iv = std::stod(row[0]), ip = std::stod(row[1]);
      const double tv = std::stod(row[2]), tp = std::stod(row[3]);
      t.add_row({dicke::io::format(n), dicke::io::format(d), row[0], row[1],
          dicke::io::format(std::fabs(iv - ip) / ip), row[2], row[3],
          dicke::io::format(std::fabs(tv - tp) / tp), row[4], row[5]});
    }
  }
  return doc;
}

// ---------------------------------------------------------------------- mc

struct McArgs
{
  SystemArgs sys;
  std::uint64_t trajectories = 1000;
  std::uint64_t seed = 1;
  std::size_t bins = 200;
  double t_min = -1.0;
  double t_max = -1.0;
  std::string scale = "log";
  bool progress = false;
  bool records = false;
};

dicke::io::Document run_mc(const Common & c, const McArgs & a)
{
  const auto spec = make_spec(a.sys);
  const double scale = spec.n_emitters() * spec.max_rate().to_double();
  const double lo = a.t_min > 0.0 ? a.t_min : (a.scale == "log" ? 1e-3 / scale : 0.0);
  const double hi = a.t_max > 0.0 ? a.t_max : 1e2 / scale;
  dicke::BatchOptions opts;
  opts.n_trajectories = a.trajectories;
  opts.seed = a.seed;
  opts.threads = c.threads;
  opts.keep_records = a.records;
  if (a.scale == "log") {
    opts.bins = dicke::TimeBins::logarithmic(lo, hi, a.bins);
  } else if (a.scale == "linear") {
    opts.bins = dicke::TimeBins::linear(lo, hi, a.bins);
  } else {
    throw dicke::ValidationError("--bin-scale must be log or linear");
  }
  if (a.progress) {
    const std::uint64_t every = std::max<std::uint64_t>(1, a.trajectories / 20);
    opts.progress = [every, total = a.trajectories](std::uint64_t done) {
        if (done % every == 0 || done == total) {
          std::cerr << "mc: " << done << " / " << total << " trajectories\n";
        }
      };
  }
  auto batch = dicke::simulate_batch(spec, opts);
  auto est = dicke::estimate_intensity(batch);

  dicke::io::Document doc;
  doc.command = "mc";
  echo_spec(doc, spec);
  doc.echo("trajectories", a.trajectories);
  doc.echo("seed", a.seed);
  doc.echo("rng_scheme", batch.rng_scheme);
  doc.echo("bins", a.bins);
  doc.echo("bin_scale", a.scale);
  doc.echo("t_min", lo);
  doc.echo("t_max", hi);
  echo_common(doc, c);

  const std::size_t d = spec.n_channels();
  std::vector<std::string> cols{"t_lo", "t_hi"};
  for (std::size_t ch = 0; ch <= d; ++ch) {
    const std::string name = ch < d ? "I_" + std::to_string(ch + 1) : std::string("I_total");
    cols.push_back(name);
    cols.push_back(name + "_se");
  }
  auto & t = doc.add_table("intensity", cols);
  for (std::size_t b = 0; b < batch.bins.size(); ++b) {
    std::vector<std::string> row{dicke::io::format(est.edges[b]),
      dicke::io::format(est.edges[b + 1])};
    for (std::size_t ch = 0; ch <= d; ++ch) {
      row.push_back(dicke::io::format(est.rate[ch][b]));
      row.push_back(est.empty[ch][b] ? std::string("inf") :
        dicke::io::format(est.standard_error[ch][b]));
    }
    t.add_row(std::move(row));
  }
  auto & f = doc.add_table("final_fraction", {"channel", "mean", "standard_error", "late_jumps"});
  for (std::size_t ch = 0; ch < d; ++ch) {
    auto [mean, se] = batch.mean_fraction(ch);
    f.add_row(static_cast<unsigned>(ch + 1), mean, se, batch.overflow[ch]);
  }
  if (batch.has_histogram) {
    std::vector<std::string> hc;
    for (std::size_t ch = 0; ch < d; ++ch) {
      hc.push_back("n" + std::to_string(ch + 1));
    }
    hc.push_back("count");
    auto & h = doc.add_table("final_states", hc);
    for (const auto & [state, count] : batch.final_histogram) {
      std::vector<std::string> row;
      for (unsigned v : state) {
        row.push_back(dicke::io::format(v));
      }
      row.push_back(dicke::io::format(count));
      h.add_row(std::move(row));
    }
  }
  if (!batch.records.empty()) {
    auto & r = doc.add_table("jumps", {"trajectory", "k", "t", "channel", "intensity"});
    for (const auto & rec : batch.records) {
      for (std::size_t k = 0; k < rec.jump_times.size(); ++k) {
        r.add_row(rec.index, static_cast<std::uint64_t>(k), rec.jump_times[k],
          static_cast<unsigned>(rec.jump_channels[k] + 1), rec.intensities[k]);
      }
    }
  }
  return doc;
}

// --------------------------------------------------------------- meanfield

struct MeanfieldArgs
{
  std::string n_list = "100,1000";
  std::string ratios = "0.5,1,2";
  bool distribution = false;
  bool exact = true;
};

dicke::io::Document run_meanfield(const Common & c, const MeanfieldArgs & a)
{
  dicke::io::Document doc;
  doc.command = "meanfield";
  doc.echo("n_list", a.n_list);
  doc.echo("ratios", a.ratios);
  doc.echo("exact", a.exact);
  echo_common(doc, c);
  auto ns = parse_list<unsigned>(a.n_list, "--n");
  auto rs = parse_list<double>(a.ratios, "--ratio");
  auto & t = doc.add_table("sweep",
      {"n", "r", "tau_star", "n_bar_2_exact", "n_bar_2_asym", "chi_exact", "chi_asym",
        "thermal_ratio"});
  for (unsigned n : ns) {
    for (double r : rs) {
      auto st = dicke::solve_stopping_time(n, 1.0, r);
      std::string nb = "", chi = "";
      if (a.exact) {
        auto op = dicke::order_parameter(n, RateValue::from_double(r));
        nb = dicke::io::format(op.n_bar_2);
        chi = dicke::io::format(op.susceptibility);
      }
      t.add_row({dicke::io::format(n), dicke::io::format(r), dicke::io::format(st.tau_star), nb,
          dicke::io::format(dicke::order_parameter_asymptotic(n, r)), chi,
          dicke::io::format(dicke::susceptibility_asymptotic(n, r)),
          dicke::io::format(dicke::thermal_ratio(n, 1.0, r))});
    }
  }
  if (a.distribution) {
    const unsigned n = ns.front();
    const auto r = RateValue::from_double(rs.front());
    auto asym = dicke::asymptotic_distribution(n, r);
    auto exact = dicke::steady_state_two_channel(n, r);
    auto & dt = doc.add_table("distribution", {"x", "p_exact", "p_asymptotic"});
    for (unsigned x = 0; x <= n; ++x) {
      dt.add_row(x, exact.probabilities[x], asym.probabilities[x]);
    }
  }
  return doc;
}

// ------------------------------------------------------------ cavity-check

struct CavityArgs
{
  unsigned n = 5;
  double g = 1.0;
  std::string kappa_over_g = "1,3,10,30,100";
  unsigned cutoff = 10;
  double gamma_t_max = 3.0;
  std::size_t points = 301;
  bool curves = false;
};

dicke::io::Document run_cavity(const Common & c, const CavityArgs & a)
{
  dicke::CavityModel model;
  model.n_emitters = a.n;
  model.g = a.g;
  model.fock_cutoff = a.cutoff;
  auto sweep = dicke::convergence_sweep(
    model, parse_list<double>(a.kappa_over_g, "--kappa-over-g"), a.gamma_t_max, a.points);

  dicke::io::Document doc;
  doc.command = "cavity-check";
  doc.echo("n", a.n);
  doc.echo("g", a.g);
  doc.echo("kappa_over_g", a.kappa_over_g);
  doc.echo("fock_cutoff", a.cutoff);
  doc.echo("gamma_t_max", a.gamma_t_max);
  doc.echo("points", a.points);
  echo_common(doc, c);
  auto & t = doc.add_table("sweep",
      {"kappa_over_g", "gamma_eff", "linf_deviation", "relative_deviation", "max_trace_error",
        "max_hermiticity_error", "max_tail_population", "bad_cavity"});
  for (const auto & s : sweep) {
    dicke::CavityModel m = model;
    m.kappa = s.kappa_over_g * a.g;
    t.add_row(s.kappa_over_g, s.gamma_eff, s.linf_deviation, s.relative_deviation,
      s.max_trace_error, s.max_hermiticity_error, s.max_tail_population, m.bad_cavity());
  }
  if (a.curves) {
    auto & cv = doc.add_table("curves",
        {"kappa_over_g", "t", "gamma_t", "s_dag_s_full", "s_dag_s_dicke", "photon_number"});
    for (const auto & s : sweep) {
      for (std::size_t i = 0; i < s.full.times.size(); ++i) {
        const double time = s.full.times[i];
        cv.add_row(s.kappa_over_g, time, time * s.gamma_eff, s.full.s_dag_s[i], s.dicke[i],
          s.full.photon_number[i]);
      }
    }
  }
  return doc;
}

// ------------------------------------------------------------------ verify

struct VerifyArgs
{
  bool quick = false;
  std::uint64_t seed = 1;
};

dicke::io::Document run_verify(const Common & c, const VerifyArgs & a, bool & all_passed)
{
  dicke::check::VerifyOptions opts;
  opts.quick = a.quick;
  opts.seed = a.seed;
  opts.threads = c.threads;
  opts.on_result = [](const dicke::check::CheckResult & r) {
      std::cerr << (r.passed() ? "PASS  " : "FAIL  ") << r.name << "  " << r.metric << " = " <<
        r.value << " (" << r.relation << ' ' << r.threshold << ")\n";
    };
  auto results = dicke::check::run_verify(opts);

  dicke::io::Document doc;
  doc.command = "verify";
  doc.echo("quick", a.quick);
  doc.echo("seed", a.seed);
  echo_common(doc, c);
  auto & t = doc.add_table("checks", {"check", "metric", "value", "relation", "threshold",
        "status"});
  all_passed = true;
  for (const auto & r : results) {
    t.add_row(r.name, r.metric, r.value, r.relation, r.threshold,
      std::string(r.passed() ? "pass" : "fail"));
    all_passed = all_passed && r.passed();
  }
  return doc;
}

void add_common(CLI::App * app, Common & c)
{
  app->add_option("--out", c.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  app->add_option("-o,--output", c.output, "Output file ('-' for standard output)");
  app->add_option("--precision", c.precision,
    "Working precision in bits (53, 128, ..., 4096) or 'auto' to escalate on demand");
  app->add_option("--threads", c.threads, "Worker thread cap")->check(CLI::PositiveNumber);
}

void add_system(CLI::App * app, SystemArgs & s)
{
  app->add_option("--n", s.n, "Number of emitters")->check(CLI::PositiveNumber);
  app->add_option("--rates", s.rates, "Comma-separated channel rates (decimals or p/q)");
  app->add_option("--ratio", s.ratio, "Two channels with rates 1 and this ratio");
}

void add_grid(CLI::App * app, GridArgs & g)
{
  app->add_option("--t-min", g.t_min, "First output time");
  app->add_option("--t-max", g.t_max, "Last output time (default 6 ln(N+1)/(N Gamma_min))");
  app->add_option("--t-points", g.points, "Number of output times");
  app->add_option("--t-scale", g.scale, "Grid spacing")->check(CLI::IsMember({"linear", "log"}));
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"Closed-form, stochastic and cross-validated multichannel superradiance"};
  app.require_subcommand(1);
  Common common;

  DynamicsArgs dyn;
  auto * dyn_cmd = app.add_subcommand("dynamics", "Populations and intensities in closed form");
  add_common(dyn_cmd, common);
  add_system(dyn_cmd, dyn.sys);
  add_grid(dyn_cmd, dyn.grid);
  dyn_cmd->add_option("--populations", dyn.populations, "auto, states, levels or none");
  dyn_cmd->add_flag("--expressions", dyn.expressions,
    "Attach every population as an exponential sum (JSON output)");

  SteadyArgs st;
  auto * st_cmd = app.add_subcommand("steady", "Steady-state distribution and order parameter");
  add_common(st_cmd, common);
  add_system(st_cmd, st.sys);
  st_cmd->add_option("--step", st.step, "Relative step of the susceptibility difference");
  st_cmd->add_option("--r-grid", st.r_grid, "Order-parameter sweep lo:hi:count");

  ScalingArgs sc;
  auto * sc_cmd = app.add_subcommand("scaling", "Burst peak against the balanced scaling laws");
  add_common(sc_cmd, common);
  sc_cmd->add_option("--n", sc.n_list, "Comma-separated emitter counts");
  sc_cmd->add_option("--d", sc.d_list, "Comma-separated channel counts");

  McArgs mc;
  auto * mc_cmd = app.add_subcommand("mc", "Stochastic trajectory batch");
  add_common(mc_cmd, common);
  add_system(mc_cmd, mc.sys);
  mc_cmd->add_option("--trajectories", mc.trajectories, "Number of trajectories");
  mc_cmd->add_option("--seed", mc.seed, "Master seed");
  mc_cmd->add_option("--bins", mc.bins, "Number of time bins");
  mc_cmd->add_option("--t-min", mc.t_min, "Lower bin edge");
  mc_cmd->add_option("--t-max", mc.t_max, "Upper bin edge");
  mc_cmd->add_option("--bin-scale", mc.scale, "log or linear");
  mc_cmd->add_flag("--progress", mc.progress, "Report progress on standard error");
  mc_cmd->add_flag("--records", mc.records, "Write every jump (small N only)");

  MeanfieldArgs mf;
  auto * mf_cmd = app.add_subcommand("meanfield", "Large-N asymptotics against exact values");
  add_common(mf_cmd, common);
  mf_cmd->add_option("--n", mf.n_list, "Comma-separated emitter counts");
  mf_cmd->add_option("--ratio", mf.ratios, "Comma-separated rate ratios");
  mf_cmd->add_flag("--distribution", mf.distribution,
    "Also write both distributions for the first (N, r)");
  mf_cmd->add_flag("!--no-exact", mf.exact, "Skip the exact order parameter");

  CavityArgs cav;
  auto * cav_cmd = app.add_subcommand("cavity-check", "Full cavity model against the Dicke model");
  add_common(cav_cmd, common);
  cav_cmd->add_option("--n", cav.n, "Number of emitters")->check(CLI::PositiveNumber);
  cav_cmd->add_option("--g", cav.g, "Coupling rate");
  cav_cmd->add_option("--kappa-over-g", cav.kappa_over_g, "Comma-separated kappa/g values");
  cav_cmd->add_option("--cutoff", cav.cutoff, "Fock cutoff");
  cav_cmd->add_option("--gamma-t-max", cav.gamma_t_max, "End of the Gamma_eff t window");
  cav_cmd->add_option("--points", cav.points, "Samples per curve");
  cav_cmd->add_flag("--curves", cav.curves, "Also write the curves");

  VerifyArgs ver;
  auto * ver_cmd = app.add_subcommand("verify", "Cross-validation matrix");
  add_common(ver_cmd, common);
  ver_cmd->add_flag("--quick", ver.quick, "Only the checks at N <= 10");
  ver_cmd->add_option("--seed", ver.seed, "Master seed for the Monte Carlo checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError & e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    const auto format = dicke::io::parse_format(common.format);
    dicke::io::Document doc;
    int status = 0;
    if (dyn_cmd->parsed()) {
      doc = run_dynamics(common, dyn);
    } else if (st_cmd->parsed()) {
      doc = run_steady(common, st);
    } else if (sc_cmd->parsed()) {
      doc = run_scaling(common, sc);
    } else if (mc_cmd->parsed()) {
      doc = run_mc(common, mc);
    } else if (mf_cmd->parsed()) {
      doc = run_meanfield(common, mf);
    } else if (cav_cmd->parsed()) {
      doc = run_cavity(common, cav);
    } else if (ver_cmd->parsed()) {
      bool ok = true;
      doc = run_verify(common, ver, ok);
      status = ok ? 0 : 2;
    }
    dicke::io::write(doc, format, common.output);
    return status;
  } catch (const dicke::Error & e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::bad_alloc &) {
    std::cerr << "error: out of memory\n";
    return 3;
  } catch (const std::exception & e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
