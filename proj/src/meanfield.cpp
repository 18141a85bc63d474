#include "dclust/meanfield.hpp"

#include "dclust/csv.hpp"
#include "dclust/errors.hpp"
#include "dclust/rng.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <string>

namespace dclust {

bool moment_solver_supports(const ScenarioConfig& config) {
  return std::all_of(config.types.begin(), config.types.end(), [](const NameType& t) {
    return std::holds_alternative<AffineDrift>(t.drift) && t.rho == 0.5;
  });
}

void require_moment_solver(const ScenarioConfig& config) {
  for (const auto& t : config.types) {
    if (!std::holds_alternative<AffineDrift>(t.drift))
      throw UnsupportedConfig("type '" + t.label + "': the moment solver needs an affine drift");
    if (t.rho != 0.5) throw UnsupportedConfig("type '" + t.label + "': the moment solver needs rho = 1/2");
  }
}

MomentState initial_state(const ScenarioConfig& config) {
  check_structure(config);
  MomentState s;
  s.x = config.risk.x0;
  s.types = config.types.size();
  s.cap = config.controls.moment_cap;
  s.u.resize(s.types * static_cast<std::size_t>(s.cap + 1));
  for (std::size_t i = 0; i < s.types; ++i) {
    double p = 1.0;
    for (int k = 0; k <= s.cap; ++k) {
      s.at(i, k) = p;
      p *= config.types[i].lambda0;
    }
  }
  return s;
}

std::vector<double> coupling_Q(const MomentState& state, const ScenarioConfig& config) {
  std::vector<double> q(config.rank(), 0.0);
  for (std::size_t i = 0; i < state.types; ++i) {
    const auto& t = config.types[i];
    for (std::size_t j = 0; j < q.size(); ++j) q[j] += t.weight * t.ell[j] * state.at(i, 1);
  }
  return q;
}

MomentState step_moments(const MomentState& state, const ScenarioConfig& config, double dv, double dt,
                         const MomentOptions& options, std::size_t* clamp_count) {
  require_moment_solver(config);
  const int cap = state.cap;
  const auto q = coupling_Q(state, config);
  const double x = state.x;
  const double b0 = config.risk.drift(x);
  const double s0 = config.risk.vol(x);

  MomentState next = state;
  for (std::size_t i = 0; i < state.types; ++i) {
    const auto& type = config.types[i];
    const auto& drift = std::get<AffineDrift>(type.drift);
    double contagion = 0.0;
    for (std::size_t j = 0; j < q.size(); ++j) contagion += type.beta_c[j] * q[j];
    const double bs = type.beta_s;

    next.at(i, 0) = state.at(i, 0) - state.at(i, 1) * dt;
    for (int k = 1; k <= cap; ++k) {
      const double kk = k;
      const double uk = state.at(i, k);
      const double prev = state.at(i, k - 1);
      const double above = k < cap ? state.at(i, k + 1)
                                   : (config.controls.closure == ClosureRule::CopyLast ? uk : 0.0);
      const double drift_term = kk * (-drift.alpha_bar + bs * b0) * uk +
                                0.5 * bs * bs * s0 * s0 * kk * (kk - 1.0) * uk +
                                (0.5 * type.sigma * type.sigma * kk * (kk - 1.0) + drift.alpha_bar * drift.lambda_bar * kk +
                                 kk * contagion) * prev -
                                above;
      next.at(i, k) = uk + drift_term * dt + bs * s0 * kk * uk * dv;
    }
  }
  for (double& v : next.u) {
    if (!std::isfinite(v) || std::abs(v) > options.blowup_guard)
      throw NumericalBlowup("moment hierarchy exceeded " + std::to_string(options.blowup_guard) + " at t = " +
                            std::to_string(state.t + dt) + "; reduce dt or the moment cap");
    if (v < options.clamp_below) {
      v = 0.0;
      if (clamp_count) ++*clamp_count;
    }
  }
  next.x = advance_factor(config.risk, x, dt, dv).next;
  next.t = state.t + dt;
  return next;
}

namespace {

void record(const MomentState& s, const ScenarioConfig& config, std::size_t k, TrialOutput& out) {
  auto& p = out.paths;
  const std::size_t r = config.rank();
  double d = 0.0;
  for (std::size_t i = 0; i < s.types; ++i) {
    const double u0 = s.at(i, 0);
    out.u0[i][k] = u0;
    d += config.types[i].weight * (1.0 - u0);
    p.D_by_type[i][k] = 1.0 - u0;
  }
  p.D[k] = d;
  for (std::size_t j = 0; j < r; ++j) {
    double l = 0.0;
    for (std::size_t i = 0; i < s.types; ++i) {
      const auto& t = config.types[i];
      l += t.weight * t.ell[j] * (1.0 - s.at(i, 0));
    }
    p.L[j][k] = l;
  }
  for (std::size_t i = 0; i < s.types; ++i) {
    double q = 0.0;
    for (std::size_t j = 0; j < r; ++j) q += config.types[i].beta_c[j] * p.L[j][k];
    p.Q_by_type[i][k] = q;
  }
  p.X[k] = s.x;
}

}  // namespace

TrialOutput solve_trial(const ScenarioConfig& config, std::uint64_t trial_seed, const MomentOptions& options) {
  check_structure(config);
  const auto dv = common_noise(trial_seed, config.controls.steps(), config.controls.dt);
  return solve_trial(config, dv, options);
}

TrialOutput solve_trial(const ScenarioConfig& config, std::span<const double> dv, const MomentOptions& options) {
  check_structure(config);
  require_moment_solver(config);
  const int steps = config.controls.steps();
  const double dt = config.controls.dt;
  if (dv.size() != static_cast<std::size_t>(steps)) throw MalformedConfig("common-noise path has the wrong length");

  TrialOutput out;
  out.paths = LossPaths(steps, dt, config.types.size(), config.rank());
  out.u0.assign(config.types.size(), std::vector<double>(static_cast<std::size_t>(steps) + 1, 0.0));
  out.dv.assign(dv.begin(), dv.end());
  MomentState s = initial_state(config);
  record(s, config, 0, out);
  for (int k = 0; k < steps; ++k) {
    s = step_moments(s, config, dv[static_cast<std::size_t>(k)], dt, options, &out.clamp_count);
    s.t = (k + 1) * dt;
    record(s, config, static_cast<std::size_t>(k) + 1, out);
  }
  return out;
}

double Histogram::bin_left(std::size_t b) const {
  return lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(counts.size());
}

double Histogram::bin_right(std::size_t b) const {
  return b + 1 == counts.size() ? hi : bin_left(b + 1);
}

Histogram make_histogram(std::span<const double> values, int bins) {
  if (bins < 1) throw MalformedConfig("histogram needs at least one bin");
  Histogram h;
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  if (values.empty()) return h;
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  h.lo = *mn;
  h.hi = *mx;
  const double width = h.hi - h.lo;
  for (double v : values) {
    std::size_t b = 0;
    if (width > 0.0) {
      b = static_cast<std::size_t>((v - h.lo) / width * bins);
      b = std::min(b, h.counts.size() - 1);
    }
    ++h.counts[b];
  }
  return h;
}

void write_histogram_csv(const Histogram& h, const std::filesystem::path& path) {
  CsvWriter out(path);
  const std::vector<std::string> head{"bin_left", "bin_right", "count"};
  out.header(head);
  for (std::size_t b = 0; b < h.counts.size(); ++b) {
    const double row[] = {h.bin_left(b), h.bin_right(b), static_cast<double>(h.counts[b])};
    out.row(row);
  }
}

void for_each_trial(const ScenarioConfig& config, const EnsembleOptions& options,
                    const std::function<void(std::int64_t, const TrialOutput&)>& visit) {
  check_structure(config);
  require_moment_solver(config);
  const std::int64_t trials = config.controls.trials;
  const auto block = static_cast<std::int64_t>(std::max<std::size_t>(options.block, 1));
  const int threads = thread_count(options.exec);
  std::vector<TrialOutput> results(static_cast<std::size_t>(block));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(block));

  for (std::int64_t start = 0; start < trials; start += block) {
    const std::int64_t count = std::min(block, trials - start);
#pragma omp parallel for num_threads(threads) schedule(dynamic)
    for (std::int64_t i = 0; i < count; ++i) {
      const auto slot = static_cast<std::size_t>(i);
      errors[slot] = nullptr;
      try {
        results[slot] = solve_trial(config, trial_seed(config.controls.seed, static_cast<std::uint64_t>(start + i)),
                                    options.moments);
      } catch (...) {
        errors[slot] = std::current_exception();
      }
    }
    for (std::int64_t i = 0; i < count; ++i) {
      const auto slot = static_cast<std::size_t>(i);
      if (errors[slot]) std::rethrow_exception(errors[slot]);
      visit(start + i, results[slot]);
    }
  }
}

std::size_t count_order_violations(const ScenarioConfig& config, const LossPaths& paths) {
  const std::size_t types = config.types.size();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t a = 0; a < types; ++a) {
    for (std::size_t b = 0; b < types; ++b) {
      if (a == b) continue;
      bool dominates = true;
      for (std::size_t j = 0; j < config.rank(); ++j)
        dominates = dominates && config.types[a].beta_c[j] >= config.types[b].beta_c[j];
      if (dominates) pairs.emplace_back(a, b);
    }
  }
  std::size_t violations = 0;
  for (std::size_t k = 0; k < paths.points(); ++k) {
    bool nonneg = true;
    for (const auto& l : paths.L) nonneg = nonneg && l[k] >= 0.0;
    if (!nonneg) continue;
    for (const auto& [a, b] : pairs)
      if (paths.Q_by_type[a][k] < paths.Q_by_type[b][k]) ++violations;
  }
  return violations;
}

EnsembleOutput solve_ensemble(const ScenarioConfig& config, const EnsembleOptions& options) {
  check_structure(config);
  EnsembleOutput out;
  out.trials = config.controls.trials;
  out.mean = LossPaths(config.controls.steps(), config.controls.dt, config.types.size(), config.rank());
  out.final_loss_by_type.assign(config.types.size(), {});
  for_each_trial(config, options, [&](std::int64_t, const TrialOutput& trial) {
    accumulate(out.mean, trial.paths);
    out.final_loss.push_back(trial.paths.D.back());
    for (std::size_t i = 0; i < config.types.size(); ++i)
      out.final_loss_by_type[i].push_back(trial.paths.D_by_type[i].back());
    out.clamp_count += trial.clamp_count;
    out.order_violations += count_order_violations(config, trial.paths);
  });
  const double n = static_cast<double>(out.trials);
  scale(out.mean, 1.0 / n);
  double sum = 0.0;
  for (double v : out.final_loss) sum += v;
  out.mean_final_loss = sum / n;
  double ss = 0.0;
  for (double v : out.final_loss) ss += (v - out.mean_final_loss) * (v - out.mean_final_loss);
  out.var_final_loss = out.trials > 1 ? ss / (n - 1.0) : 0.0;
  out.histogram = make_histogram(out.final_loss, options.bins);
  return out;
}

ScenarioConfig reduce_rank(const ScenarioConfig& config, std::size_t theta) {
  check_structure(config);
  if (theta < 1 || theta > config.rank())
    throw RankOutOfRange("theta = " + std::to_string(theta) + " outside [1, " + std::to_string(config.rank()) + "]");
  ScenarioConfig out = config;
  out.types.clear();
  for (const auto& type : config.types) {
    NameType t = type;
    t.beta_c.resize(theta);
    t.ell.resize(theta);
    auto same = std::find_if(out.types.begin(), out.types.end(), [&](const NameType& o) {
      NameType a = o, b = t;
      a.label = b.label;
      a.weight = b.weight;
      return a == b;
    });
    if (same != out.types.end())
      same->weight += t.weight;
    else
      out.types.push_back(std::move(t));
  }
  return out;
}

namespace {

bool dynamics_match(const NameType& full, const NameType& reduced) {
  const std::size_t theta = reduced.beta_c.size();
  const double tol = 1e-12;
  for (std::size_t j = 0; j < theta; ++j) {
    if (std::abs(full.beta_c[j] - reduced.beta_c[j]) > tol * std::max(1.0, std::abs(full.beta_c[j]))) return false;
    if (std::abs(full.ell[j] - reduced.ell[j]) > tol * std::max(1.0, std::abs(full.ell[j]))) return false;
  }
  return full.sigma == reduced.sigma && full.drift == reduced.drift && full.beta_s == reduced.beta_s &&
         full.rho == reduced.rho && full.lambda0 == reduced.lambda0;
}

}  // namespace

CompareReport compare_lowrank(const ScenarioConfig& full, const ScenarioConfig& reduced,
                              const EnsembleOptions& options) {
  check_structure(full);
  check_structure(reduced);
  if (!(full.controls == reduced.controls) || !(full.risk == reduced.risk))
    throw MalformedConfig("full and reduced scenarios must share controls, seed and systematic risk");
  if (reduced.rank() > full.rank()) throw MalformedConfig("reduced scenario has a larger rank than the full one");

  CompareReport rep;
  rep.trials = full.controls.trials;
  for (const auto& t : full.types) {
    auto it = std::find_if(reduced.types.begin(), reduced.types.end(),
                           [&](const NameType& r) { return dynamics_match(t, r); });
    if (it == reduced.types.end())
      throw MalformedConfig("full type '" + t.label + "' has no counterpart in the reduced scenario");
    rep.type_map.push_back(static_cast<std::size_t>(it - reduced.types.begin()));
  }

  const int steps = full.controls.steps();
  const auto points = static_cast<std::size_t>(steps) + 1;
  const double n = static_cast<double>(rep.trials);
  using clock = std::chrono::steady_clock;

  // Reduced ensemble first; its Q paths are kept for the pairwise PE.
  std::vector<std::vector<std::vector<double>>> q_reduced(static_cast<std::size_t>(rep.trials));
  rep.mean_reduced = LossPaths(steps, full.controls.dt, reduced.types.size(), reduced.rank());
  auto t0 = clock::now();
  for_each_trial(reduced, options, [&](std::int64_t i, const TrialOutput& trial) {
    accumulate(rep.mean_reduced, trial.paths);
    q_reduced[static_cast<std::size_t>(i)] = trial.paths.Q_by_type;
  });
  rep.seconds_reduced = std::chrono::duration<double>(clock::now() - t0).count();

  std::vector<std::vector<double>> pe_sum(full.types.size(), std::vector<double>(points, 0.0));
  std::vector<std::vector<std::int64_t>> pe_count(full.types.size(), std::vector<std::int64_t>(points, 0));
  rep.mean_full = LossPaths(steps, full.controls.dt, full.types.size(), full.rank());
  t0 = clock::now();
  for_each_trial(full, options, [&](std::int64_t i, const TrialOutput& trial) {
    accumulate(rep.mean_full, trial.paths);
    const auto& qr = q_reduced[static_cast<std::size_t>(i)];
    for (std::size_t t = 0; t < full.types.size(); ++t) {
      const auto& qf = trial.paths.Q_by_type[t];
      const auto& qa = qr[rep.type_map[t]];
      for (std::size_t k = 0; k < points; ++k) {
        if (qf[k] == 0.0) continue;
        pe_sum[t][k] += std::abs(qf[k] - qa[k]) / std::abs(qf[k]);
        ++pe_count[t][k];
      }
    }
  });
  rep.seconds_full = std::chrono::duration<double>(clock::now() - t0).count();
  rep.wall_clock_ratio = rep.seconds_reduced > 0.0 ? rep.seconds_full / rep.seconds_reduced : 0.0;

  scale(rep.mean_full, 1.0 / n);
  scale(rep.mean_reduced, 1.0 / n);

  rep.mean_pe.assign(full.types.size(), std::vector<double>(points, 0.0));
  rep.max_mean_pe_by_type.assign(full.types.size(), 0.0);
  for (std::size_t t = 0; t < full.types.size(); ++t) {
    for (std::size_t k = 0; k < points; ++k) {
      if (pe_count[t][k] == 0) continue;
      rep.mean_pe[t][k] = pe_sum[t][k] / static_cast<double>(pe_count[t][k]);
      rep.max_mean_pe_by_type[t] = std::max(rep.max_mean_pe_by_type[t], rep.mean_pe[t][k]);
    }
    rep.max_mean_pe = std::max(rep.max_mean_pe, rep.max_mean_pe_by_type[t]);
  }
  for (std::size_t k = 0; k < points; ++k)
    rep.max_abs_mean_D_diff = std::max(rep.max_abs_mean_D_diff, std::abs(rep.mean_full.D[k] - rep.mean_reduced.D[k]));
  return rep;
}

void write_pe_csv(const CompareReport& report, const std::filesystem::path& path) {
  CsvWriter out(path);
  std::vector<std::string> head{"t"};
  for (std::size_t t = 0; t < report.mean_pe.size(); ++t) head.push_back("pe_type_" + std::to_string(t + 1));
  out.header(head);
  std::vector<double> row;
  for (std::size_t k = 0; k < report.mean_full.points(); ++k) {
    row.assign(1, report.mean_full.time[k]);
    for (const auto& pe : report.mean_pe) row.push_back(pe[k]);
    out.row(row);
  }
}

}  // namespace dclust
