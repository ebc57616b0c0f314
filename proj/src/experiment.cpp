#include "iagan/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "iagan/errors.hpp"
#include "iagan/image_io.hpp"

namespace iagan {

std::string to_string(Task t) {
  switch (t) {
    case Task::cs_gaussian: return "cs_gaussian";
    case Task::cs_fourier: return "cs_fourier";
    case Task::super_resolution: return "super_resolution";
    case Task::deblur: return "deblur";
    case Task::inpaint: return "inpaint";
  }
  return "unknown";
}

Task parse_task(const std::string& name) {
  for (Task t : {Task::cs_gaussian, Task::cs_fourier, Task::super_resolution, Task::deblur, Task::inpaint}) {
    if (to_string(t) == name) return t;
  }
  throw SpecError("unknown task '" + name + "'");
}

void ExperimentSpec::validate() const {
  if (generator_dims.size() < 2) throw SpecError("generator_dims needs at least two entries");
  if (generator_dims.back() != dataset.height * dataset.width) {
    throw SpecError(fmt::format("generator output {} does not match {}x{} images", generator_dims.back(),
                                dataset.height, dataset.width));
  }
  if (dataset.height < 8 || dataset.width < 8) throw SpecError("dataset images must be at least 8x8");
  if (dataset.d_true < 1) throw SpecError("dataset.d_true must be at least 1");
  if (dataset.test_count < 1) throw SpecError("dataset.test_count must be at least 1");
  if (dataset.test_offset < dataset.count) throw SpecError("dataset.test_offset overlaps the training images");
  if (op.m_over_n.empty()) throw SpecError("operator.m_over_n must not be empty");
  for (double r : op.m_over_n) {
    if (!(r > 0.0 && r <= 1.0)) throw SpecError(fmt::format("m_over_n value {} is outside (0, 1]", r));
  }
  if (!(noise_std >= 0.0)) throw SpecError("noise_std must be non-negative");
  if (methods.empty()) throw SpecError("methods must not be empty");
  for (Method m : methods) {
    if (noise_std > 0.0 && is_back_projection(m)) {
      throw SpecError(fmt::format("method {} is not available with noise_std > 0", to_string(m)));
    }
  }
  if (task == Task::super_resolution &&
      (op.scale < 1 || dataset.height % op.scale != 0 || dataset.width % op.scale != 0)) {
    throw SpecError(fmt::format("scale {} does not divide {}x{}", op.scale, dataset.height, dataset.width));
  }
  if (task == Task::deblur && op.kernel_size % 2 == 0) throw SpecError("deblur kernel_size must be odd");
  if (std::abs(static_cast<long>(misalignment_shift)) >= static_cast<long>(dataset.height)) {
    throw SpecError(fmt::format("misalignment_shift {} must be smaller than the image height {}", misalignment_shift,
                                dataset.height));
  }
  if (csgm.restarts < 1 || !(csgm.lr_z > 0.0)) throw SpecError("csgm needs restarts >= 1 and lr_z > 0");
  if (!(iagan.lr_z > 0.0) || !(iagan.lr_theta > 0.0)) throw SpecError("iagan needs positive lr_z and lr_theta");
  try {
    glo.validate();
    cg.validate();
  } catch (const std::invalid_argument& e) {
    throw SpecError(e.what());
  }
}

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw SpecError(where + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) throw SpecError(fmt::format("unknown key '{}' in {}", key, where));
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void read_solver(const json& j, SolveConfig& c, const std::string& where) {
  reject_unknown(j, {"lr_z", "lr_theta", "iterations", "restarts", "patience", "min_relative_improvement",
                     "latent_radius", "layer_scaled_lr", "preset"},
                 where);
  if (j.contains("preset")) {
    const std::string p = j.at("preset").get<std::string>();
    static const std::map<std::string, SolveConfig (*)()> presets{
        {"csgm_began", &SolveConfig::csgm_began},         {"csgm_pggan", &SolveConfig::csgm_pggan},
        {"iagan_began_cs", &SolveConfig::iagan_began_cs}, {"iagan_began_sr", &SolveConfig::iagan_began_sr},
        {"iagan_pggan_cs", &SolveConfig::iagan_pggan_cs}, {"iagan_pggan_sr", &SolveConfig::iagan_pggan_sr},
    };
    auto it = presets.find(p);
    if (it == presets.end()) throw SpecError("unknown solver preset '" + p + "'");
    c = it->second();
  }
  read(j, "lr_z", c.lr_z);
  read(j, "lr_theta", c.lr_theta);
  read(j, "iterations", c.iterations);
  read(j, "restarts", c.restarts);
  read(j, "patience", c.patience);
  read(j, "min_relative_improvement", c.min_relative_improvement);
  read(j, "latent_radius", c.latent_radius);
  read(j, "layer_scaled_lr", c.layer_scaled_lr);
}

}  // namespace

ExperimentSpec parse_spec(const json& j) {
  ExperimentSpec s;
  try {
    reject_unknown(j, {"task", "generator", "generator_dims", "dataset", "glo", "operator", "noise_std", "methods",
                       "csgm", "iagan", "cg", "probe", "output_dir", "seed", "misalignment_shift",
                       "record_decomposition", "save_images"},
                   "spec");
    if (j.contains("task")) s.task = parse_task(j.at("task").get<std::string>());
    read(j, "generator", s.generator_path);
    read(j, "generator_dims", s.generator_dims);
    if (j.contains("dataset")) {
      const json& d = j.at("dataset");
      reject_unknown(d, {"seed", "count", "height", "width", "d_true", "test_count", "test_offset"}, "dataset");
      read(d, "seed", s.dataset.seed);
      read(d, "count", s.dataset.count);
      read(d, "height", s.dataset.height);
      read(d, "width", s.dataset.width);
      read(d, "d_true", s.dataset.d_true);
      read(d, "test_count", s.dataset.test_count);
      read(d, "test_offset", s.dataset.test_offset);
    }
    if (j.contains("glo")) {
      const json& g = j.at("glo");
      reject_unknown(g, {"epochs", "lr_weights", "lr_latents", "radius"}, "glo");
      read(g, "epochs", s.glo.epochs);
      read(g, "lr_weights", s.glo.lr_weights);
      read(g, "lr_latents", s.glo.lr_latents);
      read(g, "radius", s.glo.radius);
    }
    if (j.contains("operator")) {
      const json& o = j.at("operator");
      reject_unknown(o, {"m_over_n", "mask", "scale", "kernel_size"}, "operator");
      if (o.contains("m_over_n")) {
        const json& r = o.at("m_over_n");
        s.op.m_over_n = r.is_array() ? r.get<std::vector<double>>() : std::vector<double>{r.get<double>()};
      }
      read(o, "mask", s.op.mask_path);
      read(o, "scale", s.op.scale);
      read(o, "kernel_size", s.op.kernel_size);
    }
    read(j, "noise_std", s.noise_std);
    if (j.contains("methods")) {
      s.methods.clear();
      for (const auto& m : j.at("methods")) {
        try {
          s.methods.push_back(parse_method(m.get<std::string>()));
        } catch (const std::invalid_argument& e) {
          throw SpecError(e.what());
        }
      }
    }
    if (j.contains("csgm")) read_solver(j.at("csgm"), s.csgm, "csgm");
    if (j.contains("iagan")) read_solver(j.at("iagan"), s.iagan, "iagan");
    if (j.contains("cg")) {
      const json& c = j.at("cg");
      reject_unknown(c, {"tol", "max_iter"}, "cg");
      read(c, "tol", s.cg.tol);
      read(c, "max_iter", s.cg.max_iter);
    }
    if (j.contains("probe")) {
      const json& p = j.at("probe");
      reject_unknown(p, {"lr", "iterations", "restarts", "latent_radius", "mode", "lr_latent_joint", "lr_weights",
                         "joint_iterations", "adapted_layers"},
                     "probe");
      read(p, "lr", s.probe.lr);
      read(p, "iterations", s.probe.iterations);
      read(p, "restarts", s.probe.restarts);
      read(p, "latent_radius", s.probe.latent_radius);
      if (p.contains("mode")) {
        const std::string mode = p.at("mode").get<std::string>();
        if (mode == "joint_weights") s.probe.mode = FirstLayerMode::joint_weights;
        else if (mode == "direct_latent") s.probe.mode = FirstLayerMode::direct_latent;
        else throw SpecError("unknown probe mode '" + mode + "'");
      }
      read(p, "lr_latent_joint", s.probe.lr_latent_joint);
      read(p, "lr_weights", s.probe.lr_weights);
      read(p, "joint_iterations", s.probe.joint_iterations);
      read(p, "adapted_layers", s.probe.adapted_layers);
    }
    read(j, "output_dir", s.output_dir);
    read(j, "seed", s.seed);
    read(j, "misalignment_shift", s.misalignment_shift);
    read(j, "record_decomposition", s.record_decomposition);
    read(j, "save_images", s.save_images);
  } catch (const json::exception& e) {
    throw SpecError(std::string("malformed spec: ") + e.what());
  }
  s.validate();
  return s;
}

ExperimentSpec load_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open spec " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw SpecError(fmt::format("{}: {}", path.string(), e.what()));
  }
  return parse_spec(j);
}

ToyDataset make_training_images(const ExperimentSpec& spec) {
  const auto& d = spec.dataset;
  return make_toy_dataset(RngStream(d.seed), d.count, d.height, d.width, d.d_true, 0);
}

ToyDataset make_test_images(const ExperimentSpec& spec) {
  const auto& d = spec.dataset;
  return make_toy_dataset(RngStream(d.seed), d.test_count, d.height, d.width, d.d_true, d.test_offset);
}

Tensor circular_shift_rows(const Tensor& image, std::size_t h, std::size_t w, long shift) {
  if (image.size() != h * w) throw ShapeError("circular_shift_rows: image size does not match h*w");
  const long hl = static_cast<long>(h);
  const long s = ((shift % hl) + hl) % hl;
  Tensor out(image.shape());
  for (std::size_t r = 0; r < h; ++r) {
    const auto dst = static_cast<std::size_t>((static_cast<long>(r) + s) % hl);
    std::copy_n(image.data().begin() + static_cast<std::ptrdiff_t>(r * w), w,
                out.data().begin() + static_cast<std::ptrdiff_t>(dst * w));
  }
  return out;
}

std::filesystem::path resolve_output(const std::string& path) {
  std::filesystem::path p(path);
  if (p.is_absolute()) return p;
  if (const char* root = std::getenv("IAGAN_OUTPUT_ROOT"); root && *root) return std::filesystem::path(root) / p;
  return p;
}

namespace {

std::string fmt_num(double v) { return fmt::format("{}", v); }

// One operator setting of a sweep. Gaussian and inpainting operators are
// redrawn per image; the others are shared across images.
struct OperatorPoint {
  double m_over_n = 0.0;
  std::optional<LinearOperator> shared;
  double draw_fraction = 0.0;
};

std::vector<OperatorPoint> operator_points(const ExperimentSpec& spec) {
  const std::size_t h = spec.dataset.height, w = spec.dataset.width;
  const RngStream mask_rng = RngStream(spec.seed).fork("mask");
  std::vector<OperatorPoint> pts;
  switch (spec.task) {
    case Task::cs_gaussian:
    case Task::inpaint:
      for (double r : spec.op.m_over_n) pts.push_back({r, std::nullopt, r});
      break;
    case Task::cs_fourier:
      if (!spec.op.mask_path.empty()) {
        std::size_t mh = 0, mw = 0;
        const auto mask = load_mask_pgm(spec.op.mask_path, mh, mw);
        if (mh != h || mw != w) throw SpecError("mask dimensions do not match the images");
        const auto p = static_cast<double>(std::count(mask.begin(), mask.end(), true));
        pts.push_back({p / static_cast<double>(h * w), make_fourier_operator(mask, h, w), 0.0});
      } else {
        for (std::size_t i = 0; i < spec.op.m_over_n.size(); ++i) {
          RngStream r = mask_rng.fork(i);
          const auto mask = make_radial_mask(h, w, spec.op.m_over_n[i], r);
          const auto p = static_cast<double>(std::count(mask.begin(), mask.end(), true));
          pts.push_back({p / static_cast<double>(h * w), make_fourier_operator(mask, h, w), 0.0});
        }
      }
      break;
    case Task::super_resolution: {
      const double s = static_cast<double>(spec.op.scale);
      pts.push_back({1.0 / (s * s), make_blur_decimate_operator(bicubic_kernel(spec.op.scale), spec.op.scale, h, w), 0.0});
      break;
    }
    case Task::deblur:
      pts.push_back({1.0, make_uniform_blur_operator(spec.op.kernel_size, h, w), 0.0});
      break;
  }
  return pts;
}

LinearOperator cell_operator(const ExperimentSpec& spec, const OperatorPoint& pt, RngStream rng) {
  if (pt.shared) return *pt.shared;
  const std::size_t n = spec.dataset.height * spec.dataset.width;
  const auto m = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(pt.draw_fraction * static_cast<double>(n))));
  if (spec.task == Task::cs_gaussian) return make_gaussian_operator(rng, m, n);
  // inpaint: m distinct pixels, kept in increasing order
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  for (std::size_t i = 0; i < m; ++i) std::swap(all[i], all[i + static_cast<std::size_t>(rng.below(n - i))]);
  std::vector<std::size_t> idx(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(m));
  std::sort(idx.begin(), idx.end());
  return make_sampling_operator(idx, n);
}

SweepResult sweep_impl(const ExperimentSpec& spec, const GeneratorParams& gen, long shift) {
  spec.validate();
  if (gen.output_dim() != spec.dataset.height * spec.dataset.width) {
    throw SpecError("generator output does not match the spec's image size");
  }
  const std::size_t h = spec.dataset.height, w = spec.dataset.width;
  const ToyDataset test = make_test_images(spec);
  const std::vector<OperatorPoint> points = operator_points(spec);
  const RngStream cells = RngStream(spec.seed).fork("cell");

  SuiteConfig suite;
  suite.csgm = spec.csgm;
  suite.iagan = spec.iagan;
  suite.cg = spec.cg;
  suite.noise_mode = spec.noise_std > 0.0;
  suite.methods = spec.methods;

  std::optional<std::filesystem::path> out_dir;
  if (!spec.output_dir.empty()) {
    out_dir = resolve_output(spec.output_dir);
    std::filesystem::create_directories(*out_dir);
    if (spec.save_images) std::filesystem::create_directories(*out_dir / "images");
  }

  SweepResult res;
  for (std::size_t pi = 0; pi < points.size(); ++pi) {
    const OperatorPoint& pt = points[pi];
    for (std::size_t ii = 0; ii < test.images.size(); ++ii) {
      const std::string image_id = fmt::format("img{:03d}", ii);
      const RngStream cell = cells.fork(pi).fork(ii);
      try {
        const Tensor x = shift == 0 ? test.images[ii] : circular_shift_rows(test.images[ii], h, w, shift);
        const LinearOperator op = cell_operator(spec, pt, cell.fork("operator"));
        RngStream noise = cell.fork("noise");
        const Tensor y = synthesize_observation(op, x, spec.noise_std, noise);
        const auto reports = run_method_suite(gen, op, y, suite, cell.fork("solve"));
        if (out_dir && spec.save_images) {
          write_pgm(*out_dir / "images" / fmt::format("r{}_{}_truth.pgm", pi, image_id), x.reshaped({h, w}));
        }
        for (Method m : spec.methods) {
          auto it = reports.find(m);
          if (it == reports.end()) continue;
          const SolveReport& rep = it->second;
          const Tensor est = clamp_unit(rep.x_hat);
          CellRecord rec;
          rec.image_id = image_id;
          rec.m_over_n = pt.m_over_n;
          rec.method = m;
          rec.mse = mse(est, x);
          rec.best_objective = rep.best_objective;
          rec.iterations_run = rep.iterations_run;
          if (spec.record_decomposition) rec.decomposition = error_decomposition(op, x, rep.x_hat, spec.cg);
          res.rows.push_back({image_id, to_string(m), rec.mse, spec.noise_std, pt.m_over_n});
          res.cells.push_back(std::move(rec));
          if (out_dir && spec.save_images) {
            write_pgm(*out_dir / "images" / fmt::format("r{}_{}_{}.pgm", pi, image_id, to_string(m)), est.reshaped({h, w}));
          }
        }
      } catch (const std::exception& e) {
        res.failures.push_back(fmt::format("m/n={} {}: {}", fmt_num(pt.m_over_n), image_id, e.what()));
      }
    }
  }
  res.summary = summarize(res.rows);
  if (out_dir) {
    write_metrics_csv(*out_dir / "metrics.csv", res.rows);
    write_summary_csv(*out_dir / "summary.csv", res.summary);
    if (spec.record_decomposition) {
      std::ofstream d(*out_dir / "decomposition.csv");
      d << "image_id,method,m_over_n,row_err,null_err\n";
      for (const CellRecord& c : res.cells) {
        if (!c.decomposition) continue;
        d << c.image_id << ',' << to_string(c.method) << ',' << fmt_num(c.m_over_n) << ','
          << fmt_num(c.decomposition->row_err) << ',' << fmt_num(c.decomposition->null_err) << '\n';
      }
    }
    if (!res.failures.empty()) {
      std::ofstream f(*out_dir / "failures.txt");
      for (const auto& msg : res.failures) f << msg << '\n';
    }
  }
  return res;
}

}  // namespace

std::vector<SummaryRow> summarize(const std::vector<MetricRow>& rows) {
  std::map<std::tuple<std::string, double, double>, std::vector<double>> groups;
  for (const MetricRow& r : rows) groups[{r.method, r.m_over_n, r.noise_std}].push_back(r.mse);
  std::vector<SummaryRow> out;
  for (const auto& [key, mses] : groups) {
    SummaryRow s;
    std::tie(s.method, s.m_over_n, s.noise_std) = key;
    double sum = 0.0;
    for (double v : mses) sum += v;
    s.mse_mean = sum / static_cast<double>(mses.size());
    s.psnr_avg_db = psnr_avg(mses);
    s.images = mses.size();
    out.push_back(std::move(s));
  }
  return out;
}

SweepResult run_sweep(const ExperimentSpec& spec, const GeneratorParams& gen) {
  return sweep_impl(spec, gen, spec.misalignment_shift);
}

SweepResult run_misalignment(const ExperimentSpec& spec, const GeneratorParams& gen) {
  if (spec.task != Task::super_resolution) throw SpecError("misalignment runs require task super_resolution");
  return sweep_impl(spec, gen, spec.misalignment_shift);
}

SolveRun run_solve(const ExperimentSpec& spec, const GeneratorParams& gen, std::size_t image_index,
                   const std::optional<Tensor>& image) {
  spec.validate();
  if (gen.output_dim() != spec.dataset.height * spec.dataset.width) {
    throw SpecError("generator output does not match the spec's image size");
  }
  const std::size_t h = spec.dataset.height, w = spec.dataset.width;
  SolveRun run;
  if (image) {
    if (image->size() != h * w) throw SpecError("input image does not match the spec's image size");
    run.truth = image->reshaped({h * w});
  } else {
    if (image_index >= spec.dataset.test_count) throw SpecError("image index beyond dataset.test_count");
    ExperimentSpec one = spec;
    one.dataset.test_count = image_index + 1;
    run.truth = make_test_images(one).images[image_index];
  }
  run.image_id = fmt::format("img{:03d}", image_index);
  const std::vector<OperatorPoint> points = operator_points(spec);
  run.m_over_n = points.front().m_over_n;

  SuiteConfig suite;
  suite.csgm = spec.csgm;
  suite.iagan = spec.iagan;
  suite.cg = spec.cg;
  suite.noise_mode = spec.noise_std > 0.0;
  suite.methods = spec.methods;

  const RngStream cell = RngStream(spec.seed).fork("cell").fork(0).fork(image_index);
  const LinearOperator op = cell_operator(spec, points.front(), cell.fork("operator"));
  RngStream noise = cell.fork("noise");
  run.y = synthesize_observation(op, run.truth, spec.noise_std, noise);
  const auto t0 = std::chrono::steady_clock::now();
  run.reports = run_method_suite(gen, op, run.y, suite, cell.fork("solve"));
  run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return run;
}

std::vector<ProbeRow> run_probe(const ExperimentSpec& spec, const GeneratorParams& gen) {
  spec.validate();
  const ToyDataset test = make_test_images(spec);
  const std::vector<OperatorPoint> points = operator_points(spec);
  const RngStream base = RngStream(spec.seed).fork("probe");
  const RngStream cells = RngStream(spec.seed).fork("cell");

  SuiteConfig suite;
  suite.csgm = spec.csgm;
  suite.iagan = spec.iagan;
  suite.cg = spec.cg;
  suite.noise_mode = spec.noise_std > 0.0;
  suite.methods = spec.methods;

  std::vector<ProbeRow> out;
  for (std::size_t ii = 0; ii < test.images.size(); ++ii) {
    const Tensor& x = test.images[ii];
    ProbeRow row;
    row.image_id = fmt::format("img{:03d}", ii);
    const ProbeReport pr = representation_error_first_layer(gen, x, spec.probe, base.fork(ii));
    row.e_rep = pr.e_rep;
    row.e_rep_tilde = pr.e_rep_tilde.value_or(pr.e_rep);
    const RngStream cell = cells.fork(0).fork(ii);
    const LinearOperator op = cell_operator(spec, points.front(), cell.fork("operator"));
    RngStream noise = cell.fork("noise");
    const Tensor y = synthesize_observation(op, x, spec.noise_std, noise);
    const auto reports = run_method_suite(gen, op, y, suite, cell.fork("solve"));
    for (Method m : spec.methods) {
      if (auto it = reports.find(m); it != reports.end()) {
        row.decompositions.emplace_back(m, error_decomposition(op, x, it->second.x_hat, spec.cg));
      }
    }
    out.push_back(std::move(row));
  }
  if (!spec.output_dir.empty()) {
    const auto dir = resolve_output(spec.output_dir);
    std::filesystem::create_directories(dir);
    write_probe_csv(dir / "probe.csv", out);
  }
  return out;
}

GloResult run_training(const ExperimentSpec& spec) {
  spec.validate();
  if (spec.generator_path.empty()) throw SpecError("spec has no generator path to write to");
  const ToyDataset train = make_training_images(spec);
  RngStream rng = RngStream(spec.seed).fork("glo");
  GloResult res = train_glo(train, spec.generator_dims, spec.glo, rng);
  const auto dir = resolve_output(spec.generator_path);
  save_generator(dir, res.params, spec.seed);
  std::ofstream trace(dir / "loss_trace.csv");
  trace << "epoch,loss\n";
  for (std::size_t e = 0; e < res.loss_trace.size(); ++e) trace << e << ',' << fmt_num(res.loss_trace[e]) << '\n';
  return res;
}

void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "image_id,method,m_over_n,noise_std,mse\n";
  for (const MetricRow& r : rows) {
    out << r.image_id << ',' << r.method << ',' << fmt_num(r.m_over_n) << ',' << fmt_num(r.noise_std) << ','
        << fmt_num(r.mse) << '\n';
  }
}

std::vector<MetricRow> read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "image_id,method,m_over_n,noise_std,mse") {
    throw std::runtime_error(path.string() + ": unexpected header");
  }
  std::vector<MetricRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 5) throw std::runtime_error(path.string() + ": malformed row '" + line + "'");
    rows.push_back({f[0], f[1], std::stod(f[4]), std::stod(f[3]), std::stod(f[2])});
  }
  return rows;
}

void write_summary_csv(const std::filesystem::path& path, const std::vector<SummaryRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "method,m_over_n,noise_std,mse_mean,psnr_avg_db\n";
  for (const SummaryRow& r : rows) {
    out << r.method << ',' << fmt_num(r.m_over_n) << ',' << fmt_num(r.noise_std) << ',' << fmt_num(r.mse_mean) << ','
        << fmt_num(r.psnr_avg_db) << '\n';
  }
}

void write_probe_csv(const std::filesystem::path& path, const std::vector<ProbeRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "image_id,e_rep,e_rep_tilde";
  if (!rows.empty()) {
    for (const auto& [m, _] : rows.front().decompositions) out << ",row_err_" << to_string(m) << ",null_err_" << to_string(m);
  }
  out << '\n';
  for (const ProbeRow& r : rows) {
    out << r.image_id << ',' << fmt_num(r.e_rep) << ',' << fmt_num(r.e_rep_tilde);
    for (const auto& [_, d] : r.decompositions) out << ',' << fmt_num(d.row_err) << ',' << fmt_num(d.null_err);
    out << '\n';
  }
}

}  // namespace iagan
