#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "iagan/experiment.hpp"
#include "iagan/image_io.hpp"

using namespace iagan;
using nlohmann::json;

namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kCellFailure = 1;
constexpr int kBadSpec = 2;

// Options shared by every subcommand that reads a spec.
struct Common {
  std::string spec_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string generator;

  void add_to(CLI::App* app, bool needs_out = true) {
    app->add_option("--spec", spec_path, "experiment spec (JSON)");
    app->add_option("--seed", seed, "overrides the spec seed");
    app->add_option("--generator", generator, "overrides the spec generator directory");
    if (needs_out) app->add_option("--out", out, "overrides the spec output directory");
  }

  ExperimentSpec load() const {
    ExperimentSpec s = spec_path.empty() ? ExperimentSpec{} : load_spec(spec_path);
    if (seed) s.seed = *seed;
    if (!out.empty()) s.output_dir = out;
    if (!generator.empty()) s.generator_path = generator;
    s.validate();
    return s;
  }
};

GeneratorParams load_spec_generator(const ExperimentSpec& s) {
  if (s.generator_path.empty()) throw SpecError("no generator path (set \"generator\" or --generator)");
  return load_generator(resolve_output(s.generator_path));
}

void print_summary(const std::vector<SummaryRow>& rows) {
  for (const SummaryRow& r : rows) {
    fmt::print("{:<9} m/n {:<6.4g} mse {:10.4f}  psnr {:6.2f} dB  ({} images)\n", r.method, r.m_over_n, r.mse_mean,
               r.psnr_avg_db, r.images);
  }
}

int report_sweep(const SweepResult& r) {
  print_summary(r.summary);
  for (const auto& f : r.failures) fmt::print(stderr, "failed cell: {}\n", f);
  return r.failures.empty() ? kOk : kCellFailure;
}

int cmd_train(const Common& c) {
  const ExperimentSpec s = c.load();
  const GloResult r = run_training(s);
  fmt::print("trained {} epochs, final loss {:.6g}, {} backoffs -> {}\n", r.loss_trace.size() - 1, r.loss_trace.back(),
             r.backoffs, resolve_output(s.generator_path).string());
  return kOk;
}

struct SolveOptions {
  std::string task;
  std::vector<std::string> methods;
  std::optional<double> m_over_n;
  std::optional<double> noise;
  std::size_t image = 0;
  std::string input;
};

int cmd_solve(const Common& c, const SolveOptions& o) {
  ExperimentSpec s = c.load();
  if (!o.task.empty()) s.task = parse_task(o.task);
  if (!o.methods.empty()) {
    s.methods.clear();
    for (const auto& m : o.methods) s.methods.push_back(parse_method(m));
  }
  if (o.m_over_n) s.op.m_over_n = {*o.m_over_n};
  if (o.noise) s.noise_std = *o.noise;
  if (s.output_dir.empty()) s.output_dir = "solve_out";
  s.validate();
  const GeneratorParams gen = load_spec_generator(s);
  std::optional<Tensor> image;
  if (!o.input.empty()) image = read_pgm(o.input);
  const SolveRun run = run_solve(s, gen, o.image, image);

  const fs::path dir = resolve_output(s.output_dir);
  fs::create_directories(dir);
  const std::size_t h = s.dataset.height, w = s.dataset.width;
  write_pgm(dir / "truth.pgm", run.truth.reshaped({h, w}));
  json report;
  report["image_id"] = run.image_id;
  report["task"] = to_string(s.task);
  report["m_over_n"] = run.m_over_n;
  report["noise_std"] = s.noise_std;
  report["seed"] = s.seed;
  report["seconds"] = run.seconds;
  for (Method m : s.methods) {
    auto it = run.reports.find(m);
    if (it == run.reports.end()) continue;
    const SolveReport& r = it->second;
    const std::string name = to_string(m);
    const Tensor est = clamp_unit(r.x_hat);
    write_pgm(dir / (name + ".pgm"), est.reshaped({h, w}));
    std::ofstream trace(dir / (name + "_trace.csv"));
    trace << "iter,objective\n";
    for (std::size_t i = 0; i < r.objective_trace.size(); ++i) {
      trace << i << ',' << fmt::format("{}", r.objective_trace[i]) << '\n';
    }
    report["methods"][name] = {{"best_objective", r.best_objective},
                               {"iterations_run", r.iterations_run},
                               {"diverged_runs", r.diverged_runs},
                               {"mse", mse(est, run.truth)}};
    fmt::print("{:<9} objective {:.6g}  mse {:.4f}  iterations {}\n", name, r.best_objective, mse(est, run.truth),
               r.iterations_run);
  }
  std::ofstream(dir / "report.json") << report.dump(2) << '\n';
  return kOk;
}

int cmd_sweep(const Common& c) {
  const ExperimentSpec s = c.load();
  return report_sweep(run_sweep(s, load_spec_generator(s)));
}

int cmd_misalign(const Common& c, std::optional<int> shift) {
  ExperimentSpec s = c.load();
  if (shift) s.misalignment_shift = *shift;
  s.task = Task::super_resolution;
  s.validate();
  return report_sweep(run_misalignment(s, load_spec_generator(s)));
}

int cmd_probe(const Common& c) {
  const ExperimentSpec s = c.load();
  const auto rows = run_probe(s, load_spec_generator(s));
  double e = 0.0, et = 0.0;
  for (const ProbeRow& r : rows) {
    e += r.e_rep;
    et += r.e_rep_tilde;
  }
  const auto n = static_cast<double>(rows.size());
  fmt::print("{} images  mean e_rep {:.6g}  mean e_rep_tilde {:.6g}\n", rows.size(), e / n, et / n);
  return kOk;
}

struct MetricsOptions {
  std::string truth, estimate, csv;
  std::vector<double> mses;
};

int cmd_metrics(const MetricsOptions& o, const std::string& out) {
  int done = 0;
  if (!o.truth.empty() || !o.estimate.empty()) {
    if (o.truth.empty() || o.estimate.empty()) throw SpecError("--truth and --estimate go together");
    const double v = mse(read_pgm(o.estimate), read_pgm(o.truth));
    fmt::print("mse {:.6f}  psnr {:.4f} dB\n", v, psnr_avg(std::vector<double>{v}));
    ++done;
  }
  if (!o.mses.empty()) {
    fmt::print("psnr_avg {:.4f} dB  per-image mean {:.4f} dB\n", psnr_avg(o.mses), psnr_mean_per_image(o.mses));
    ++done;
  }
  if (!o.csv.empty()) {
    const auto summary = summarize(read_metrics_csv(o.csv));
    print_summary(summary);
    if (!out.empty()) write_summary_csv(resolve_output(out), summary);
    ++done;
  }
  if (done == 0) throw SpecError("metrics needs --truth/--estimate, --mses or --csv");
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generative-prior reconstruction experiments"};
  app.require_subcommand(1);

  Common common;
  auto* train = app.add_subcommand("train", "train the toy generator described by a spec");
  common.add_to(train, false);

  SolveOptions solve_opts;
  auto* solve = app.add_subcommand("solve", "reconstruct one image and write estimates, traces and a report");
  common.add_to(solve);
  solve->add_option("--task", solve_opts.task, "cs_gaussian, cs_fourier, super_resolution, deblur or inpaint");
  solve->add_option("--methods", solve_opts.methods, "csgm, csgm_bp, iagan, iagan_bp")->delimiter(',');
  solve->add_option("--m-over-n", solve_opts.m_over_n, "measurement ratio");
  solve->add_option("--noise", solve_opts.noise, "observation noise std on the [0, 1] scale");
  solve->add_option("--image", solve_opts.image, "test image index");
  solve->add_option("--input", solve_opts.input, "PGM image to use instead of a test image");

  auto* sweep = app.add_subcommand("sweep", "run every operator point and test image of a spec");
  common.add_to(sweep);

  std::optional<int> shift;
  auto* misalign = app.add_subcommand("misalign", "super-resolution sweep on vertically shifted test images");
  common.add_to(misalign);
  misalign->add_option("--shift", shift, "rows to shift (default: the spec value)");

  auto* probe = app.add_subcommand("probe", "representation-error probes and error decompositions");
  common.add_to(probe);

  MetricsOptions metrics_opts;
  std::string metrics_out;
  auto* metrics = app.add_subcommand("metrics", "score images or summarize a metrics CSV");
  metrics->add_option("--truth", metrics_opts.truth, "reference PGM");
  metrics->add_option("--estimate", metrics_opts.estimate, "estimate PGM");
  metrics->add_option("--mses", metrics_opts.mses, "per-image MSEs to average into one PSNR")->delimiter(',');
  metrics->add_option("--csv", metrics_opts.csv, "per-image metrics CSV to summarize");
  metrics->add_option("--out", metrics_out, "summary CSV to write");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kBadSpec;
  }

  try {
    if (*train) return cmd_train(common);
    if (*solve) return cmd_solve(common, solve_opts);
    if (*sweep) return cmd_sweep(common);
    if (*misalign) return cmd_misalign(common, shift);
    if (*probe) return cmd_probe(common);
    if (*metrics) return cmd_metrics(metrics_opts, metrics_out);
  } catch (const SpecError& e) {
    fmt::print(stderr, "invalid spec: {}\n", e.what());
    return kBadSpec;
  } catch (const std::invalid_argument& e) {
    fmt::print(stderr, "invalid argument: {}\n", e.what());
    return kBadSpec;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kCellFailure;
  }
  return kOk;
}
