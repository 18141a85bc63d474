#include "commands.hpp"

#include "scenario_file.hpp"

#include "dclust/csv.hpp"
#include "dclust/errors.hpp"
#include "dclust/meanfield.hpp"
#include "dclust/network.hpp"
#include "dclust/oracle.hpp"
#include "dclust/particle.hpp"
#include "dclust/rng.hpp"
#include "dclust/scenarios.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>

namespace dclust::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

struct Common {
  std::string scenario;
  std::optional<std::int64_t> trials;
  std::optional<std::uint64_t> seed;
  int threads = 0;
  std::string out;
  std::optional<int> bins;
  std::optional<std::size_t> theta;
};

void add_common(CLI::App* cmd, Common& c, bool needs_scenario = true) {
  auto* s = cmd->add_option("--scenario", c.scenario, "scenario file (JSON)");
  if (needs_scenario) s->required();
  cmd->add_option("--trials", c.trials, "Monte Carlo trials (overrides the file)");
  cmd->add_option("--seed", c.seed, "master seed (overrides the file)");
  cmd->add_option("--threads", c.threads, "thread budget, 0 = OpenMP default");
  cmd->add_option("--out", c.out, "output directory");
  cmd->add_option("--bins", c.bins, "histogram bins");
  cmd->add_option("--theta", c.theta, "rank for low-rank runs");
}

ScenarioFile load(const Common& c) {
  ScenarioFile file = load_scenario_file(c.scenario);
  if (c.trials) file.config.controls.trials = *c.trials;
  if (c.seed) file.config.controls.seed = *c.seed;
  if (c.bins) file.bins = *c.bins;
  if (c.theta) file.theta = *c.theta;
  if (file.bins < 1) throw MalformedConfig("bins must be at least 1");
  require_valid(file.config);
  return file;
}

fs::path out_dir(const Common& c, const ScenarioFile& file) { return c.out.empty() ? fs::path(file.output_dir) : fs::path(c.out); }

ExecPolicy exec(const Common& c) { return ExecPolicy{c.threads}; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void write_json(const fs::path& path, const ojson& doc) { write_text_file(path, doc.dump(2) + "\n"); }

void summary_line(std::ostream& out, std::string_view command, const std::string& label, double mean_dt,
                  std::int64_t trials, double seconds) {
  out << command << ' ' << label << ": mean D_T = " << mean_dt << " over " << trials << " trials in " << seconds
      << " s\n";
}

int cmd_meanfield(const Common& c, std::ostream& out) {
  const auto file = load(c);
  const auto dir = out_dir(c, file);
  EnsembleOptions opts;
  opts.exec = exec(c);
  opts.bins = file.bins;
  const auto t0 = std::chrono::steady_clock::now();
  const auto ens = solve_ensemble(file.config, opts);
  const double secs = seconds_since(t0);

  write_paths_csv(ens.mean, dir / "mean_paths.csv");
  write_histogram_csv(ens.histogram, dir / "histogram.csv");
  ojson doc;
  doc["command"] = "meanfield";
  doc["label"] = file.label;
  doc["trials"] = ens.trials;
  doc["seed"] = file.config.controls.seed;
  doc["closure"] = std::string(to_string(file.config.controls.closure));
  doc["mean_D_T"] = ens.mean_final_loss;
  doc["var_D_T"] = ens.var_final_loss;
  auto& by_type = doc["mean_D_T_by_type"] = ojson::array();
  for (std::size_t i = 0; i < file.config.types.size(); ++i) by_type.push_back(ens.mean.D_by_type[i].back());
  doc["q_order_violations"] = ens.order_violations;
  doc["negative_moment_clamps"] = ens.clamp_count;
  doc["runtime_seconds"] = secs;
  write_json(dir / "summary.json", doc);
  summary_line(out, "meanfield", file.label, ens.mean_final_loss, ens.trials, secs);
  return 0;
}

int cmd_particles(const Common& c, const std::string& matrix, const std::string& format, std::ostream& out) {
  const auto file = load(c);
  const auto dir = out_dir(c, file);
  const PoolLayout layout =
      matrix.empty() ? block_layout(file.config)
                     : svd_layout(file.config, svd_decompose(read_matrix(matrix, format == "triples"
                                                                                     ? MatrixFormat::Triples
                                                                                     : MatrixFormat::Dense)));
  PoolOptions opts;
  opts.exec = exec(c);
  const auto t0 = std::chrono::steady_clock::now();
  const auto ens = simulate_pool_ensemble(file.config, layout, opts);
  const double secs = seconds_since(t0);

  write_paths_csv(ens.mean, dir / "mean_paths.csv");
  write_histogram_csv(make_histogram(ens.final_loss, file.bins), dir / "histogram.csv");
  write_defaults_csv(ens.first_trial_defaults, dir / "defaults.csv");
  ojson doc;
  doc["command"] = "particles";
  doc["label"] = file.label;
  doc["pool_size"] = layout.size;
  doc["trials"] = ens.trials;
  doc["seed"] = file.config.controls.seed;
  doc["mean_D_T"] = ens.mean_final_loss;
  doc["var_D_T"] = ens.var_final_loss;
  doc["min_intensity"] = ens.min_intensity;
  doc["runtime_seconds"] = secs;
  write_json(dir / "summary.json", doc);
  summary_line(out, "particles", file.label, ens.mean_final_loss, ens.trials, secs);
  return 0;
}

int cmd_oracle(const Common& c, std::optional<std::int64_t> particles, int picard, std::ostream& out) {
  Common cc = c;
  if (!cc.trials) cc.trials = 1;
  const auto file = load(cc);
  const auto dir = out_dir(c, file);
  OracleOptions opts;
  opts.exec = exec(c);
  opts.particles = static_cast<std::size_t>(particles.value_or(file.oracle_particles));
  if (particles && *particles < 1) throw MalformedConfig("--particles must be positive");
  opts.picard_iterations = picard;

  const auto& cfg = file.config;
  const std::int64_t trials = cfg.controls.trials;
  LossPaths mean(cfg.controls.steps(), cfg.controls.dt, cfg.types.size(), cfg.rank());
  std::vector<double> final_loss;
  bool monotone = true;
  double min_intensity = std::numeric_limits<double>::infinity();
  ojson picard_doc = ojson::array();
  const auto t0 = std::chrono::steady_clock::now();
  for (std::int64_t i = 0; i < trials; ++i) {
    const auto res = mv_solve(cfg, trial_seed(cfg.controls.seed, static_cast<std::uint64_t>(i)), opts);
    accumulate(mean, res.paths);
    final_loss.push_back(res.paths.D.back());
    monotone = monotone && res.weights_monotone;
    min_intensity = std::min(min_intensity, res.min_intensity);
    if (picard > 0)
      picard_doc.push_back(
          {{"iterations", res.picard_iterations}, {"residual", res.picard_residual}, {"gap_D", res.picard_gap}});
  }
  const double secs = seconds_since(t0);
  scale(mean, 1.0 / static_cast<double>(trials));
  double sum = 0.0;
  for (double v : final_loss) sum += v;

  write_paths_csv(mean, dir / "mean_paths.csv");
  write_histogram_csv(make_histogram(final_loss, file.bins), dir / "histogram.csv");
  ojson doc;
  doc["command"] = "oracle";
  doc["label"] = file.label;
  doc["particles_per_type"] = opts.particles;
  doc["trials"] = trials;
  doc["seed"] = cfg.controls.seed;
  doc["mean_D_T"] = sum / static_cast<double>(trials);
  doc["weights_monotone"] = monotone;
  doc["min_intensity"] = min_intensity;
  if (picard > 0) doc["picard"] = picard_doc;
  doc["runtime_seconds"] = secs;
  write_json(dir / "summary.json", doc);
  summary_line(out, "oracle", file.label, sum / static_cast<double>(trials), trials, secs);
  return 0;
}

int cmd_lln(const Common& c, std::ostream& out) {
  const auto file = load(c);
  const auto dir = out_dir(c, file);
  LlnOptions opts;
  opts.trials = c.trials.value_or(file.lln_trials);
  opts.exec = exec(c);
  opts.oracle.particles = static_cast<std::size_t>(file.oracle_particles);
  const auto t0 = std::chrono::steady_clock::now();
  const auto report = lln_harness(file.config, file.n_list, opts);
  const double secs = seconds_since(t0);
  write_text_file(dir / "lln_report.json", to_json(report));
  out << "lln " << file.label << ": slope = " << report.slope << " (monotone: " << (report.monotone ? "yes" : "no")
      << ") over " << opts.trials << " trials per N in " << secs << " s\n";
  return 0;
}

int cmd_compare(const Common& c, const std::string& reduced_path, std::ostream& out) {
  const auto file = load(c);
  const auto dir = out_dir(c, file);
  ScenarioConfig reduced;
  if (!reduced_path.empty()) {
    Common rc = c;
    rc.scenario = reduced_path;
    reduced = load(rc).config;
  } else {
    reduced = reduce_rank(file.config, file.theta);
  }
  EnsembleOptions opts;
  opts.exec = exec(c);
  const auto rep = compare_lowrank(file.config, reduced, opts);

  write_pe_csv(rep, dir / "pe_table.csv");
  write_paths_csv(rep.mean_full, dir / "mean_paths_full.csv");
  write_paths_csv(rep.mean_reduced, dir / "mean_paths_reduced.csv");
  ojson doc;
  doc["command"] = "compare";
  doc["label"] = file.label;
  doc["trials"] = rep.trials;
  doc["full_types"] = file.config.types.size();
  doc["reduced_types"] = reduced.types.size();
  doc["reduced_rank"] = reduced.rank();
  doc["max_mean_pe"] = rep.max_mean_pe;
  doc["max_mean_pe_by_type"] = rep.max_mean_pe_by_type;
  doc["max_abs_mean_D_diff"] = rep.max_abs_mean_D_diff;
  doc["mean_D_T_full"] = rep.mean_full.D.back();
  doc["mean_D_T_reduced"] = rep.mean_reduced.D.back();
  doc["seconds_full"] = rep.seconds_full;
  doc["seconds_reduced"] = rep.seconds_reduced;
  doc["wall_clock_ratio"] = rep.wall_clock_ratio;
  write_json(dir / "summary.json", doc);
  summary_line(out, "compare", file.label, rep.mean_full.D.back(), rep.trials, rep.seconds_full + rep.seconds_reduced);
  out << "  max mean PE = " << rep.max_mean_pe << ", max |mean D - mean D_reduced| = " << rep.max_abs_mean_D_diff
      << ", wall-clock ratio = " << rep.wall_clock_ratio << "\n";
  return 0;
}

int cmd_svd(const std::string& matrix, const std::string& format, double tol, std::optional<std::size_t> theta,
            double group_tol, const std::string& out_path, std::ostream& out) {
  if (format != "dense" && format != "triples") throw MalformedConfig("--format must be dense or triples");
  const auto a = read_matrix(matrix, format == "dense" ? MatrixFormat::Dense : MatrixFormat::Triples);
  const auto svd = svd_decompose(a, tol);
  const fs::path dir = out_path.empty() ? fs::path("out/svd") : fs::path(out_path);
  write_svd_csv(svd, dir);
  write_type_distribution_csv(extract_types(svd, group_tol), dir / "type_distribution.csv");

  ojson doc;
  doc["n"] = svd.n;
  doc["rank"] = svd.rank;
  doc["singular_values"] = svd.singular_values;
  if (svd.rank > 0) {
    const std::size_t th = theta.value_or(1);
    const auto lr = low_rank(svd, th);
    doc["theta"] = th;
    doc["frobenius_error"] = lr.error.frobenius;
    doc["spectral_error"] = lr.error.spectral;
    doc["tail_sum"] = lr.error.tail_sum;
  }
  write_json(dir / "low_rank.json", doc);
  out << "svd " << fs::path(matrix).filename().string() << ": rank " << svd.rank;
  if (svd.rank > 0) out << ", leading singular value " << format_number(svd.singular_values.front());
  out << '\n';
  return 0;
}

int cmd_validate(const Common& c, std::ostream& out) {
  const auto file = load_scenario_file(c.scenario);
  const auto report = validate(file.config);
  for (const auto& check : report.checks)
    out << to_string(check.status) << "  " << check.id << "  " << check.description
        << (check.detail.empty() ? "" : " (" + check.detail + ")") << '\n';
  if (!report.ok()) throw AssumptionViolation(std::to_string(report.failures().size()) + " assumption check(s) failed");
  return 0;
}

int cmd_scenario(const std::string& name, const std::string& path, std::ostream& out) {
  if (name.empty()) {
    for (const auto& n : scenario_names()) out << n << '\n';
    return 0;
  }
  const auto text = to_json(builtin_scenario_file(name));
  if (path.empty())
    out << text;
  else
    write_text_file(path, text);
  return 0;
}

int cmd_gen_matrix(const std::string& kind, const std::string& path, std::ostream& out) {
  AdjacencyMatrix a;
  if (kind == "one-cluster")
    a = one_cluster_matrix();
  else if (kind == "core-periphery-block")
    a = core_periphery_block();
  else
    throw MalformedConfig("unknown matrix kind '" + kind + "'");
  write_dense_csv(a, path);
  out << "wrote " << a.n << " x " << a.n << " matrix to " << path << '\n';
  return 0;
}

int exit_code(const Error& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const RankOutOfRange*>(&e)) return kExitConfig;
  if (dynamic_cast<const NumericalBlowup*>(&e)) return kExitBlowup;
  if (dynamic_cast<const IoError*>(&e)) return kExitIo;
  if (dynamic_cast<const NonConvergence*>(&e)) return kExitNonConvergence;
  return 1;
}

void report_error(std::ostream& err, std::string_view kind, std::string_view message) {
  err << ojson{{"error", kind}, {"message", message}}.dump() << '\n';
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Default clustering on networks: finite pools, mean-field limit and low-rank networks", "dclust"};
  app.require_subcommand(1);

  Common common;
  std::string matrix, format = "dense", reduced, name, kind, file_out;
  double tol = 1e-12, group_tol = 5e-5;
  std::optional<std::size_t> svd_theta;
  std::optional<std::int64_t> particles;
  int picard = 0;

  auto* svd = app.add_subcommand("svd", "decompose an adjacency matrix");
  svd->add_option("--matrix", matrix, "matrix file")->required();
  svd->add_option("--format", format, "dense or triples");
  svd->add_option("--tol", tol, "relative singular-value cutoff");
  svd->add_option("--theta", svd_theta, "rank of the low-rank error report");
  svd->add_option("--group-tol", group_tol, "type grouping tolerance");
  svd->add_option("--out", common.out, "output directory");

  auto* meanfield = app.add_subcommand("meanfield", "mean-field limit via the moment hierarchy");
  add_common(meanfield, common);
  auto* particles_cmd = app.add_subcommand("particles", "finite-pool simulation");
  add_common(particles_cmd, common);
  particles_cmd->add_option("--matrix", matrix, "adjacency matrix giving per-name coefficients");
  particles_cmd->add_option("--format", format, "dense or triples");
  auto* oracle = app.add_subcommand("oracle", "weighted McKean-Vlasov particle solver");
  add_common(oracle, common);
  oracle->add_option("--particles", particles, "particles per type");
  oracle->add_option("--picard", picard, "path-level Picard diagnostic iterations")->check(CLI::Range(0, 5));
  auto* lln = app.add_subcommand("lln", "finite-pool vs limit convergence");
  add_common(lln, common);
  auto* compare = app.add_subcommand("compare", "full network vs low-rank reduction");
  add_common(compare, common);
  compare->add_option("--reduced", reduced, "reduced scenario file (default: truncate to --theta)");
  auto* validate_cmd = app.add_subcommand("validate", "check a scenario against the model assumptions");
  add_common(validate_cmd, common);
  auto* scenario = app.add_subcommand("scenario", "export a built-in scenario file");
  scenario->add_option("--name", name, "built-in name (omit to list)");
  scenario->add_option("--out", file_out, "destination file (default: stdout)");
  auto* gen = app.add_subcommand("gen-matrix", "write a bundled adjacency matrix");
  gen->add_option("--kind", kind, "one-cluster or core-periphery-block")->required();
  gen->add_option("--out", file_out, "destination file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    report_error(err, "UsageError", e.what());
    return kExitConfig;
  }

  try {
    if (svd->parsed()) return cmd_svd(matrix, format, tol, svd_theta, group_tol, common.out, out);
    if (meanfield->parsed()) return cmd_meanfield(common, out);
    if (particles_cmd->parsed()) return cmd_particles(common, matrix, format, out);
    if (oracle->parsed()) return cmd_oracle(common, particles, picard, out);
    if (lln->parsed()) return cmd_lln(common, out);
    if (compare->parsed()) return cmd_compare(common, reduced, out);
    if (validate_cmd->parsed()) return cmd_validate(common, out);
    if (scenario->parsed()) return cmd_scenario(name, file_out, out);
    if (gen->parsed()) return cmd_gen_matrix(kind, file_out, out);
  } catch (const Error& e) {
    report_error(err, e.kind(), e.what());
    return exit_code(e);
  } catch (const std::exception& e) {
    report_error(err, "InternalError", e.what());
    return 1;
  }
  return 1;
}

}  // namespace dclust::cli
