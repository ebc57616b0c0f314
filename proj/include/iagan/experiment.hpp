#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "iagan/glo.hpp"
#include "iagan/metrics.hpp"
#include "iagan/operators.hpp"
#include "iagan/rep_probe.hpp"
#include "iagan/solvers.hpp"

namespace iagan {

/// Invalid experiment description (CLI exit code 2).
class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Task { cs_gaussian, cs_fourier, super_resolution, deblur, inpaint };

std::string to_string(Task t);
Task parse_task(const std::string& name);

struct DatasetSpec {
  std::uint64_t seed = 1;
  std::size_t count = 200;  // training images
  std::size_t height = 16;
  std::size_t width = 16;
  std::size_t d_true = 32;
  std::size_t test_count = 20;
  /// Index of the first test image in the sample stream; training uses [0, count).
  std::size_t test_offset = 1000000;
};

struct OperatorSpec {
  /// cs_gaussian: m/n per sweep point. cs_fourier: sampled fraction of DFT
  /// coefficients p/n. inpaint: kept fraction of pixels.
  std::vector<double> m_over_n{0.3};
  std::string mask_path;  // cs_fourier: optional PGM mask instead of radial masks
  std::size_t scale = 2;  // super_resolution
  std::size_t kernel_size = 9;  // deblur
};

struct ExperimentSpec {
  Task task = Task::cs_gaussian;
  std::string generator_path;
  std::vector<std::size_t> generator_dims{8, 32, 128, 256};
  DatasetSpec dataset;
  GloConfig glo;
  OperatorSpec op;
  double noise_std = 0.0;
  std::vector<Method> methods{Method::csgm, Method::iagan};
  SolveConfig csgm = SolveConfig::csgm_defaults();
  SolveConfig iagan = SolveConfig::iagan_defaults();
  CgConfig cg;
  ProbeConfig probe;
  std::string output_dir;
  std::uint64_t seed = 0;
  int misalignment_shift = 0;
  bool record_decomposition = false;
  bool save_images = true;

  /// Throws SpecError.
  void validate() const;
};

ExperimentSpec parse_spec(const nlohmann::json& j);
ExperimentSpec load_spec(const std::filesystem::path& path);

/// Test images for the spec: fresh draws from the training image model.
ToyDataset make_test_images(const ExperimentSpec& spec);
/// Training images for the spec.
ToyDataset make_training_images(const ExperimentSpec& spec);

/// Vertical circular shift of a flat h x w image by `shift` rows (positive
/// moves content down). Any integer is accepted; shifts are taken mod h.
Tensor circular_shift_rows(const Tensor& image, std::size_t h, std::size_t w, long shift);

struct CellRecord {
  std::string image_id;
  double m_over_n = 0.0;
  Method method = Method::csgm;
  double mse = 0.0;
  double best_objective = 0.0;
  std::size_t iterations_run = 0;
  std::optional<ErrorDecomposition> decomposition;
};

struct SummaryRow {
  std::string method;
  double m_over_n = 0.0;
  double noise_std = 0.0;
  double mse_mean = 0.0;
  double psnr_avg_db = 0.0;
  std::size_t images = 0;
};

struct SweepResult {
  std::vector<MetricRow> rows;
  std::vector<CellRecord> cells;
  std::vector<SummaryRow> summary;
  std::vector<std::string> failures;
};

/// Groups per-image rows by (method, m_over_n, noise_std), sorted by
/// method then m_over_n.
std::vector<SummaryRow> summarize(const std::vector<MetricRow>& rows);

/// For every operator point and test image: build the operator, synthesize
/// y, run the method suite and score the clamped estimates. Failed cells are
/// recorded and skipped. Writes CSVs and images when spec.output_dir is set.
SweepResult run_sweep(const ExperimentSpec& spec, const GeneratorParams& gen);

/// run_sweep with every test image circularly shifted down by
/// spec.misalignment_shift rows before observation; the generator is used
/// as is. Requires task = super_resolution and |shift| < image height.
SweepResult run_misalignment(const ExperimentSpec& spec, const GeneratorParams& gen);

struct SolveRun {
  std::string image_id;
  double m_over_n = 0.0;
  Tensor truth;
  Tensor y;
  std::map<Method, SolveReport> reports;
  double seconds = 0.0;
};

/// One sweep cell at the first operator point: the same operator, noise and
/// solver streams run_sweep uses for test image `image_index`. A supplied
/// `image` replaces the test image (it must match the spec's image size).
SolveRun run_solve(const ExperimentSpec& spec, const GeneratorParams& gen, std::size_t image_index,
                   const std::optional<Tensor>& image = std::nullopt);

struct ProbeRow {
  std::string image_id;
  double e_rep = 0.0;
  double e_rep_tilde = 0.0;
  std::vector<std::pair<Method, ErrorDecomposition>> decompositions;
};

/// Representation-error probes for every test image, plus the row/null-space
/// error split of each requested method at the first operator point.
std::vector<ProbeRow> run_probe(const ExperimentSpec& spec, const GeneratorParams& gen);

/// Trains the generator described by the spec and writes it (with a
/// loss_trace.csv) to spec.generator_path.
GloResult run_training(const ExperimentSpec& spec);

void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricRow>& rows);
std::vector<MetricRow> read_metrics_csv(const std::filesystem::path& path);
void write_summary_csv(const std::filesystem::path& path, const std::vector<SummaryRow>& rows);
void write_probe_csv(const std::filesystem::path& path, const std::vector<ProbeRow>& rows);

/// Resolves a relative output path against $IAGAN_OUTPUT_ROOT when set.
std::filesystem::path resolve_output(const std::string& path);

}  // namespace iagan
