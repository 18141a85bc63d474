#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace dclust {

// b(lambda) = -alpha_bar * (lambda - lambda_bar)
struct AffineDrift {
  double alpha_bar = 0.0;
  double lambda_bar = 0.0;
  bool operator==(const AffineDrift&) const = default;
};

// b(lambda) = c_0 + c_1 lambda + ... + c_q lambda^q
struct PolynomialDrift {
  std::vector<double> coefficients;
  bool operator==(const PolynomialDrift&) const = default;
};

using DriftSpec = std::variant<AffineDrift, PolynomialDrift>;

double drift_value(const DriftSpec& drift, double lambda);

// max(lambda, 0)^rho with a sqrt fast path for the square-root case.
inline double diffusion_power(double lambda, double rho) {
  const double pos = lambda > 0.0 ? lambda : 0.0;
  return rho == 0.5 ? std::sqrt(pos) : std::pow(pos, rho);
}

// Sampled dissipativity: lambda * b(lambda) < 0 on {k, 2k, 4k, ..., 2^20 k}.
bool dissipative_on_grid(const DriftSpec& drift, double k);

// Parameters shared by all names of one type, plus the type's probability
// mass. beta_c and ell have one entry per network cluster.
struct NameType {
  std::string label;
  double sigma = 0.0;
  DriftSpec drift = AffineDrift{};
  double beta_s = 0.0;
  std::vector<double> beta_c;
  std::vector<double> ell;
  double rho = 0.5;
  double lambda0 = 0.0;
  double weight = 1.0;

  bool operator==(const NameType&) const = default;
};

// CIR systematic factor dX = kappa (theta - X) dt + eps sqrt(X) dV.
struct SystematicRisk {
  double kappa = 0.0;
  double theta = 0.0;
  double eps = 0.0;
  double x0 = 0.0;

  double drift(double x) const { return kappa * (theta - (x > 0.0 ? x : 0.0)); }
  double vol(double x) const;
  bool feller() const { return 2.0 * kappa * theta >= eps * eps; }

  bool operator==(const SystematicRisk&) const = default;
};

struct FactorStep {
  double next;       // X after the step, floored at 0
  double increment;  // b0(X) dt + sigma0(X) dV, before flooring
};

// Full-truncation Euler step shared by every solver, so that identical dV
// sequences produce identical factor paths.
FactorStep advance_factor(const SystematicRisk& risk, double x, double dt, double dv);

enum class ClosureRule { CopyLast, Zero };

std::string_view to_string(ClosureRule rule);
ClosureRule closure_from_string(std::string_view name);

struct SolverControls {
  double t_end = 1.0;
  double dt = 0.01;
  int moment_cap = 20;
  std::int64_t trials = 1;
  std::uint64_t seed = 0;
  ClosureRule closure = ClosureRule::CopyLast;

  // Number of Euler steps; only meaningful once check_structure passed.
  int steps() const;

  bool operator==(const SolverControls&) const = default;
};

// Constants of the checkable assumptions.
struct AssumptionBounds {
  double k_bdd = 100.0;
  double sigma_lower = 1e-6;
  double dissipativity_k = 2.0;

  bool operator==(const AssumptionBounds&) const = default;
};

struct ScenarioConfig {
  std::vector<NameType> types;
  SystematicRisk risk;
  SolverControls controls;
  std::int64_t pool_size = 1000;
  AssumptionBounds bounds;

  std::size_t rank() const { return types.empty() ? 0 : types.front().beta_c.size(); }

  bool operator==(const ScenarioConfig&) const = default;
};

enum class CheckStatus { Pass, Fail, Warning, Assumed };

std::string_view to_string(CheckStatus status);

struct CheckResult {
  std::string id;
  std::string description;
  CheckStatus status = CheckStatus::Pass;
  std::string detail;
};

struct ValidationReport {
  std::vector<CheckResult> checks;

  bool ok() const;
  std::vector<const CheckResult*> failures() const;
};

// Throws MalformedConfig when the config cannot be interpreted at all.
void check_structure(const ScenarioConfig& config);

// Pure: runs check_structure, then every machine-checkable assumption.
ValidationReport validate(const ScenarioConfig& config);

// validate() and throw AssumptionViolation listing the failed checks.
void require_valid(const ScenarioConfig& config);

struct TypeAtom {
  std::size_t type_index;
  double mass;
};

// The discrete measure pi x Lambda0: one atom per type (Lambda0 is a point
// mass per type).
std::vector<TypeAtom> type_measure(const ScenarioConfig& config);

// JSON round trip. Unknown keys are rejected.
std::string to_json(const ScenarioConfig& config);
ScenarioConfig config_from_json(std::string_view text);

}  // namespace dclust
