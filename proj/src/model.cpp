#include "dclust/model.hpp"

#include "dclust/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dclust {

double drift_value(const DriftSpec& drift, double lambda) {
  if (const auto* affine = std::get_if<AffineDrift>(&drift)) {
    return -affine->alpha_bar * (lambda - affine->lambda_bar);
  }
  const auto& c = std::get<PolynomialDrift>(drift).coefficients;
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * lambda + *it;
  return acc;
}

bool dissipative_on_grid(const DriftSpec& drift, double k) {
  double lambda = k;
  for (int i = 0; i <= 20; ++i, lambda *= 2.0) {
    const double v = lambda * drift_value(drift, lambda);
    if (!(v < 0.0)) return false;
  }
  return true;
}

double SystematicRisk::vol(double x) const { return eps * std::sqrt(x > 0.0 ? x : 0.0); }

FactorStep advance_factor(const SystematicRisk& risk, double x, double dt, double dv) {
  const double inc = risk.drift(x) * dt + risk.vol(x) * dv;
  const double next = x + inc;
  return {next > 0.0 ? next : 0.0, inc};
}

std::string_view to_string(ClosureRule rule) {
  return rule == ClosureRule::CopyLast ? "copy_last" : "zero";
}

ClosureRule closure_from_string(std::string_view name) {
  if (name == "copy_last") return ClosureRule::CopyLast;
  if (name == "zero") return ClosureRule::Zero;
  throw MalformedConfig("unknown closure rule '" + std::string(name) + "'");
}

int SolverControls::steps() const { return static_cast<int>(std::llround(t_end / dt)); }

std::string_view to_string(CheckStatus status) {
  switch (status) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::Warning: return "warning";
    case CheckStatus::Assumed: return "assumed";
  }
  return "unknown";
}

bool ValidationReport::ok() const {
  return std::none_of(checks.begin(), checks.end(),
                      [](const CheckResult& c) { return c.status == CheckStatus::Fail; });
}

std::vector<const CheckResult*> ValidationReport::failures() const {
  std::vector<const CheckResult*> out;
  for (const auto& c : checks)
    if (c.status == CheckStatus::Fail) out.push_back(&c);
  return out;
}

namespace {

bool finite_all(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

std::string type_name(const NameType& t, std::size_t i) {
  return t.label.empty() ? "type " + std::to_string(i) : "type '" + t.label + "'";
}

}  // namespace

void check_structure(const ScenarioConfig& config) {
  if (config.types.empty()) throw MalformedConfig("config has no name types");
  const std::size_t r = config.rank();
  for (std::size_t i = 0; i < config.types.size(); ++i) {
    const auto& t = config.types[i];
    const auto who = type_name(t, i);
    if (t.beta_c.size() != r || t.ell.size() != r) {
      std::ostringstream msg;
      msg << who << ": beta_c/ell lengths (" << t.beta_c.size() << ", " << t.ell.size()
          << ") do not match rank " << r;
      throw MalformedConfig(msg.str());
    }
    if (!std::isfinite(t.sigma) || !std::isfinite(t.beta_s) || !std::isfinite(t.rho) ||
        !std::isfinite(t.lambda0) || !std::isfinite(t.weight) || !finite_all(t.beta_c) ||
        !finite_all(t.ell))
      throw MalformedConfig(who + ": non-finite parameter");
    if (!(t.weight > 0.0 && t.weight <= 1.0))
      throw MalformedConfig(who + ": weight must lie in (0, 1]");
    if (t.sigma < 0.0) throw MalformedConfig(who + ": sigma must be nonnegative");
    if (t.lambda0 < 0.0) throw MalformedConfig(who + ": lambda0 must be nonnegative");
    if (const auto* affine = std::get_if<AffineDrift>(&t.drift)) {
      if (!std::isfinite(affine->alpha_bar) || !std::isfinite(affine->lambda_bar))
        throw MalformedConfig(who + ": non-finite drift parameter");
    } else {
      const auto& c = std::get<PolynomialDrift>(t.drift).coefficients;
      if (c.size() < 2) throw MalformedConfig(who + ": polynomial drift needs degree >= 1");
      if (!finite_all(c)) throw MalformedConfig(who + ": non-finite drift coefficient");
    }
  }
  const auto& risk = config.risk;
  if (!std::isfinite(risk.kappa) || !std::isfinite(risk.theta) || !std::isfinite(risk.eps) ||
      !std::isfinite(risk.x0))
    throw MalformedConfig("systematic risk has a non-finite parameter");
  const auto& c = config.controls;
  if (!(c.dt > 0.0) || !std::isfinite(c.dt)) throw MalformedConfig("dt must be positive");
  if (!(c.t_end > 0.0) || !std::isfinite(c.t_end)) throw MalformedConfig("t_end must be positive");
  const double ratio = c.t_end / c.dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9)
    throw MalformedConfig("t_end / dt is not an integer number of steps");
  if (c.moment_cap < 2) throw MalformedConfig("moment_cap must be >= 2");
  if (c.trials < 1) throw MalformedConfig("trials must be >= 1");
  if (config.pool_size < 1) throw MalformedConfig("pool_size must be >= 1");
}

ValidationReport validate(const ScenarioConfig& config) {
  check_structure(config);
  ValidationReport report;
  const auto& bounds = config.bounds;
  auto add = [&](std::string id, std::string desc, bool pass, std::string detail = {}) {
    report.checks.push_back({std::move(id), std::move(desc),
                             pass ? CheckStatus::Pass : CheckStatus::Fail, std::move(detail)});
  };

  double total = 0.0;
  for (const auto& t : config.types) total += t.weight;
  add("model.weights", "type weights form a probability measure", std::abs(total - 1.0) <= 1e-12,
      "sum of weights = " + std::to_string(total));

  bool bounded = true;
  bool sigma_ok = bounds.sigma_lower > 0.0;
  bool rho_ok = true;
  std::string bounded_detail, sigma_detail, rho_detail;
  for (std::size_t i = 0; i < config.types.size(); ++i) {
    const auto& t = config.types[i];
    auto over = [&](double v) { return std::abs(v) > bounds.k_bdd; };
    bool b = !over(t.sigma) && !over(t.beta_s);
    for (double v : t.beta_c) b = b && !over(v);
    for (double v : t.ell) b = b && !over(v);
    if (const auto* affine = std::get_if<AffineDrift>(&t.drift))
      b = b && !over(affine->alpha_bar) && !over(affine->lambda_bar);
    if (!b) {
      bounded = false;
      bounded_detail += type_name(t, i) + " exceeds K_bdd; ";
    }
    if (!(t.sigma >= bounds.sigma_lower)) {
      sigma_ok = false;
      sigma_detail += type_name(t, i) + " has sigma below the lower bound; ";
    }
    if (!(t.rho >= 0.5 && t.rho < 1.0)) {
      rho_ok = false;
      rho_detail += type_name(t, i) + " has rho outside [1/2, 1); ";
    }
  }
  add("model.bounded", "coefficients bounded by K_bdd", bounded, bounded_detail);
  add("model.sigma_lower", "inf sigma^2 >= sigma_lower^2 > 0", sigma_ok, sigma_detail);
  add("model.rho", "diffusion exponent rho in [1/2, 1)", rho_ok, rho_detail);

  bool drift_ok = true;
  std::string drift_detail;
  for (std::size_t i = 0; i < config.types.size(); ++i) {
    const auto& t = config.types[i];
    if (const auto* affine = std::get_if<AffineDrift>(&t.drift)) {
      if (!(affine->alpha_bar > 0.0) || affine->lambda_bar < 0.0) {
        drift_ok = false;
        drift_detail += type_name(t, i) + ": affine drift needs alpha_bar > 0, lambda_bar >= 0; ";
      }
      continue;
    }
    const auto& c = std::get<PolynomialDrift>(t.drift).coefficients;
    if (!(c.front() > 0.0)) {
      drift_ok = false;
      drift_detail += type_name(t, i) + ": b(0) must be positive; ";
    }
    if (!(c.back() < 0.0)) {
      drift_ok = false;
      drift_detail += type_name(t, i) + ": leading coefficient must be negative; ";
    }
    if (!dissipative_on_grid(t.drift, bounds.dissipativity_k)) {
      drift_ok = false;
      drift_detail += type_name(t, i) + ": lambda*b(lambda) >= 0 somewhere on the sampling grid; ";
    }
  }
  add("model.drift", "drift is dissipative with b(0) > 0", drift_ok, drift_detail);

  const auto& risk = config.risk;
  add("risk.params", "CIR parameters kappa, theta, eps > 0 and x0 >= 0",
      risk.kappa > 0.0 && risk.theta > 0.0 && risk.eps > 0.0 && risk.x0 >= 0.0);
  report.checks.push_back({"risk.feller", "Feller condition 2 kappa theta >= eps^2",
                           risk.feller() ? CheckStatus::Pass : CheckStatus::Warning,
                           risk.feller() ? "" : "factor may touch 0; the scheme floors it"});

  for (const char* id : {"model.factor_moments", "model.factor_integrability", "model.girsanov"}) {
    report.checks.push_back({id, "integrability condition on the systematic factor",
                             CheckStatus::Assumed, "not machine-checkable"});
  }
  return report;
}

void require_valid(const ScenarioConfig& config) {
  const auto report = validate(config);
  if (report.ok()) return;
  std::string msg = "config violates model assumptions:";
  for (const auto* f : report.failures()) msg += " [" + f->id + "] " + f->detail;
  throw AssumptionViolation(msg);
}

std::vector<TypeAtom> type_measure(const ScenarioConfig& config) {
  check_structure(config);
  std::vector<TypeAtom> atoms;
  atoms.reserve(config.types.size());
  for (std::size_t i = 0; i < config.types.size(); ++i)
    atoms.push_back({i, config.types[i].weight});
  return atoms;
}

}  // namespace dclust
