// Command-line front end: single-dataset tests and Monte Carlo studies.
//
//   simcheck test-mean --data F [--c 1.0] [--B 499] [--alpha 0.10] [--seed S] [--out R]
//   simcheck test-law  --data F [--gy-start G] ...
//   simcheck mc-level  --model {mean-homo,mean-hetero,law} --n N --p P --c-grid ... --reps R
//   simcheck mc-power  --model ... --delta-grid ... --c 1.0 --reps R
//
// Exit status: 0 success, 2 degenerate statistic, 1 input or other error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "simcheck/simcheck.hpp"

namespace {

using namespace simcheck;

struct Options {
  std::string data;
  double c = 1.0;
  std::optional<int> B;
  double alpha = 0.10;
  std::uint64_t seed = 1;
  std::string out;
  std::string csv;
  std::optional<double> h;
  unsigned threads = 1;
  int max_evals = 2000;
  int starts = 5;
  double tolerance = 1e-8;
  double gy_start = 0.0;
  bool fixed_cdf = false;

  std::string model = "mean-homo";
  int n = 100;
  int p = 2;
  double sigma = 0.3;
  bool law_convex = false;
  std::vector<double> c_grid{0.5, std::sqrt(0.5), 1.0, std::sqrt(2.0), 2.0};
  std::vector<double> delta_grid{0.0, 0.25, 0.5, 0.75, 1.0};
  std::optional<int> reps;
  std::string plot;
};

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write '" + path + "'");
  f << text;
}

OptimizerConfig optimizer_from(const Options& o) {
  OptimizerConfig cfg;
  cfg.max_evals = o.max_evals;
  cfg.starts = o.starts;
  cfg.tolerance = o.tolerance;
  cfg.gy_start = o.gy_start;
  if (cfg.max_evals < 1 || cfg.starts < 1 || !(cfg.tolerance > 0.0))
    throw InputError("optimizer settings must be positive");
  return cfg;
}

int run_test(const Options& o, TestKind kind) {
  const Dataset data = load_dataset(o.data);
  TestConfig cfg;
  cfg.c = o.c;
  cfg.h_override = o.h;
  cfg.B = o.B.value_or(kind == TestKind::Mean ? 499 : 199);
  cfg.alpha = o.alpha;
  cfg.seed = o.seed;
  cfg.threads = o.threads;
  cfg.optimizer = optimizer_from(o);
  if (o.fixed_cdf) cfg.law.transform = LawTransform::FixedNormalCdf;
  const TestReport r = kind == TestKind::Mean ? run_mean_test(data, cfg) : run_law_test(data, cfg);
  write_text(o.out, format_report(r));
  if (!o.csv.empty()) write_text(o.csv, format_report_csv(r));
  return 0;
}

StudyModel model_from(const Options& o) {
  StudyModel m;
  if (o.model == "mean-homo") m.id = ModelId::MeanHomo;
  else if (o.model == "mean-hetero") m.id = ModelId::MeanHetero;
  else if (o.model == "law") m.id = ModelId::Law;
  else throw InputError("unknown model '" + o.model + "'");
  m.n = o.n;
  m.p = m.is_law() ? 2 : o.p;
  m.sigma = o.sigma;
  m.law_convex = o.law_convex;
  if (m.n < 10 || m.p < 2) throw InputError("model needs n >= 10 and p >= 2");
  return m;
}

StudyConfig study_from(const Options& o, int default_reps) {
  StudyConfig cfg;
  cfg.B = o.B.value_or(199);
  cfg.reps = o.reps.value_or(default_reps);
  cfg.alpha = o.alpha;
  cfg.seed = o.seed;
  cfg.threads = o.threads;
  cfg.optimizer = optimizer_from(o);
  return cfg;
}

void emit_study(const Options& o, const MonteCarloReport& rep) {
  write_text(o.out, format_monte_carlo_csv(rep));
  if (!o.plot.empty()) write_text(o.plot, format_plot_csv(rep));
}

int run_level(const Options& o) {
  const StudyModel m = model_from(o);
  emit_study(o, run_level_study(m, o.c_grid, study_from(o, m.is_law() ? 1000 : 500)));
  return 0;
}

int run_power(const Options& o) {
  const StudyModel m = model_from(o);
  emit_study(o, run_power_study(m, o.delta_grid, o.c, study_from(o, 250)));
  return 0;
}

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--B", o.B, "Bootstrap replicates")->check(CLI::PositiveNumber);
  sub->add_option("--alpha", o.alpha, "Test level")->check(CLI::Range(0.0, 1.0));
  sub->add_option("--seed", o.seed, "Master seed");
  sub->add_option("--out", o.out, "Report path (default stdout)");
  sub->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
  sub->add_option("--max-evals", o.max_evals, "Simplex evaluation budget per start");
  sub->add_option("--starts", o.starts, "Optimizer starting points");
  sub->add_option("--tol", o.tolerance, "Simplex spread tolerance");
}

void add_test_options(CLI::App* sub, Options& o) {
  add_common(sub, o);
  sub->add_option("--data", o.data, "CSV with header y,x1,...,xp")->required();
  sub->add_option("--c", o.c, "Bandwidth factor, h = c n^{-2/9}")->check(CLI::PositiveNumber);
  sub->add_option("--h", o.h, "Explicit test bandwidth (overrides --c)")->check(CLI::PositiveNumber);
  sub->add_option("--csv", o.csv, "Also write the report as CSV");
}

void add_study_options(CLI::App* sub, Options& o) {
  add_common(sub, o);
  sub->add_option("--model", o.model, "mean-homo, mean-hetero or law")
      ->check(CLI::IsMember({"mean-homo", "mean-hetero", "law"}));
  sub->add_option("--n", o.n, "Sample size");
  sub->add_option("--p", o.p, "Covariate dimension (mean models)");
  sub->add_option("--sigma", o.sigma, "Noise scale (mean models)");
  sub->add_flag("--law-convex", o.law_convex, "Convex-combination reading of the law model");
  sub->add_option("--reps", o.reps, "Monte Carlo replications")->check(CLI::PositiveNumber);
  sub->add_option("--plot", o.plot, "Plot-data CSV path");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Single-index model checks"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);
  Options o;

  auto* mean = app.add_subcommand("test-mean", "Test the single-index mean regression");
  add_test_options(mean, o);
  auto* law = app.add_subcommand("test-law", "Test the single-index conditional law");
  add_test_options(law, o);
  law->add_option("--gy-start", o.gy_start, "Starting response bandwidth for the rank fit")
      ->check(CLI::PositiveNumber);
  law->add_flag("--fixed-cdf", o.fixed_cdf, "Use a fitted normal CDF instead of ranks");
  auto* level = app.add_subcommand("mc-level", "Rejection rates under the null over a c grid");
  add_study_options(level, o);
  level->add_option("--c-grid", o.c_grid, "Bandwidth factors")->delimiter(',');
  auto* power = app.add_subcommand("mc-power", "Rejection rates over a delta grid");
  add_study_options(power, o);
  power->add_option("--delta-grid", o.delta_grid, "Deviations, must include 0")->delimiter(',');
  power->add_option("--c", o.c, "Bandwidth factor")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*mean) return run_test(o, TestKind::Mean);
    if (*law) return run_test(o, TestKind::Law);
    if (*level) return run_level(o);
    return run_power(o);
  } catch (const DegenerateStatistic& e) {
    std::cerr << "degenerate statistic: " << e.what() << " (I_n = " << e.i_n() << ")\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
