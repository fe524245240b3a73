#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gscat/group.hpp"

namespace gscat {

// ---- invariant suite ----

struct SuiteOptions {
  std::size_t J = 3;
  std::size_t M = 2;
  int trials = 5;
  /// Translations are checked exhaustively up to this order, sampled above it.
  std::size_t exhaustive_order = 24;
  std::size_t sampled_translations = 6;
};

struct SuiteEntry {
  std::string check;
  /// Smallest (bound - observed) over all trials; negative on failure.
  double slack = 0.0;
  bool passed = false;
  std::string detail;
};

struct SuiteReport {
  std::string group;
  std::vector<SuiteEntry> entries;

  bool passed() const;
  /// Names of the failing checks, comma separated.
  std::string failures() const;
};

/// Runs every property check on random kernels and signals over one group.
/// A check that throws is reported as failed with the error message.
SuiteReport run_invariant_suite(const GroupPtr& group, std::uint64_t seed, const SuiteOptions& options = {});

void write_suite_report(std::ostream& os, const SuiteReport& report);

// ---- experiments ----

struct ExperimentConfig {
  std::string experiment = "sn_distances";  // mnist | affine_audio | sn_distances | sn_random
  int n = 3;                                // symmetric degree
  std::uint32_t p = 61;                     // affine prime
  /// Scattering depths evaluated; every entry gets its own row after the raw baseline.
  std::vector<std::size_t> depths{1, 2};
  /// 0 uses the experiment default (one wavelet per class, 8 for mnist).
  std::vector<std::size_t> js{0};
  std::string recipe;  // empty picks the experiment default
  std::uint64_t seed = 1;
  double train_fraction = 0.5;
  std::size_t pca_dim = 0;
  std::string output_dir;

  int n_classes = 3;               // sn_random
  std::size_t train_per_class = 20;  // affine_audio
  std::size_t clips_per_class = 48;  // synthetic audio
  std::string audio_manifest;        // "path,label" lines; synthetic clips when empty
  std::string mnist_dir;
  std::size_t mnist_train = 4800;
  std::size_t mnist_test = 2400;

  double svm_c = 1.0;
  int svm_epochs = 50;
  bool standardize = true;
  double budget = 1e9;
  unsigned threads = 0;
};

/// Flat key=value text; '#' starts a comment. Unknown keys are an error.
ExperimentConfig parse_config(std::istream& is);
ExperimentConfig load_config(const std::string& path);
void apply_config_value(ExperimentConfig& config, const std::string& key, const std::string& value);
/// Throws on values outside their domain.
void validate_config(const ExperimentConfig& config);

struct MetricRow {
  std::string type;   // "original" or the kernel family
  std::string depth;  // "none" for the raw baseline
  std::string J;
  std::size_t correct = 0;
  std::size_t total = 0;
  bool evaluated = true;  // false for rows of the reference grid we cannot produce
  std::string reference;  // published value for this row, when there is one

  double accuracy() const { return total ? double(correct) / double(total) : 0.0; }
};

struct EnergyRow {
  std::size_t m = 0;
  double sum_S = 0.0;
  double sum_U = 0.0;
  /// alpha^m times the input energy; empty when no decay bound is available.
  std::optional<double> tail_bound;
};

struct ExperimentResult {
  std::string experiment;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  std::vector<MetricRow> rows;
  /// Per-layer energies summed over all samples for the deepest configuration.
  std::vector<EnergyRow> energies;

  /// Row with the given depth and J (J = "" matches any).
  const MetricRow& row(const std::string& depth, const std::string& J = "") const;
};

ExperimentResult run_experiment(const ExperimentConfig& config);

/// type,depth,J,correct,total,accuracy,reference
void write_metrics_csv(std::ostream& os, const ExperimentResult& result);
/// m,sum_S,sum_U,tail_bound
void write_energies_csv(std::ostream& os, const std::vector<EnergyRow>& rows);
/// Writes metrics.csv and energies.csv into config.output_dir when it is set.
void save_experiment(const ExperimentConfig& config, const ExperimentResult& result);

struct SyntheticAudio {
  std::vector<std::vector<double>> clips;  // 44.1 kHz, 3.2 s
  std::vector<int> labels;
};

/// Two classes with spectrally distinct slow rhythms (6-10 Hz against 22-28 Hz)
/// over shared broadband noise and a 440 Hz carrier.
SyntheticAudio synthetic_audio(std::size_t per_class, std::uint64_t seed);

}  // namespace gscat
