#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gscat/scattering.hpp"

namespace gscat {

/// Row-major real matrix with one integer label per row.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;
  std::vector<int> labels;
  /// Path of each feature block of 2|G| columns, in order.
  std::vector<std::string> manifest;

  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  const double* row(std::size_t i) const { return data.data() + i * cols; }
};

/// Per path, the real parts then the imaginary parts of S[p]f.
std::vector<double> featurize(const ScatteringOutput& out);
FeatureMatrix featurize(const std::vector<ScatteringOutput>& outputs, const std::vector<int>& labels);
/// Raw signal values laid out the same way, the no-scattering baseline.
FeatureMatrix raw_features(const std::vector<Signal>& signals, const std::vector<int>& labels);

struct PcaBasis {
  std::size_t input_dim = 0;
  std::vector<double> mean;        // input_dim
  std::vector<double> components;  // dim x input_dim, orthonormal rows
  std::vector<double> variances;   // dim, descending

  std::size_t dim() const { return variances.size(); }
  bool empty() const { return input_dim == 0; }
  std::vector<double> transform(const double* x) const;
  FeatureMatrix transform(const FeatureMatrix& X) const;
};

/// Top-d principal components. Asking for more than min(rows, cols) components,
/// or more than the data rank, clips d with a warning on stderr.
PcaBasis pca_fit(const FeatureMatrix& X, std::size_t d);

struct SvmOptions {
  double C = 1.0;
  int epochs = 50;
  std::uint64_t seed = 1;
  bool standardize = true;
  unsigned threads = 0;
};

/// One-vs-all linear classifier, optionally preceded by a PCA projection.
struct LinearModel {
  int classes = 0;
  std::size_t dim = 0;
  std::vector<double> weights;  // classes x dim
  std::vector<double> bias;     // classes
  std::vector<double> shift;    // dim, subtracted before scaling
  std::vector<double> scale;    // dim
  PcaBasis pca;

  std::vector<double> decision_values(const double* x) const;
  int predict(const double* x) const;
};

/// Pegasos hinge-loss subgradient descent per class, lambda = 1 / (C n),
/// step 1 / (lambda t), seeded shuffles, bias as a constant feature.
LinearModel svm_train(const FeatureMatrix& X, const SvmOptions& options = {});
std::vector<int> svm_predict(const LinearModel& model, const FeatureMatrix& X);

/// PCA (when pca_dim > 0) fitted on the training rows, then svm_train.
LinearModel fit_classifier(const FeatureMatrix& X, std::size_t pca_dim, const SvmOptions& options = {});

struct Evaluation {
  std::size_t correct = 0;
  std::size_t total = 0;
  double accuracy() const { return total ? double(correct) / double(total) : 0.0; }
};

Evaluation evaluate(const LinearModel& model, const FeatureMatrix& X);

/// Binary: u64 rows, u64 cols, rows x i64 labels, rows x cols f64, all little endian.
void write_features_binary(std::ostream& os, const FeatureMatrix& X);
FeatureMatrix read_features_binary(std::istream& is);
/// CSV: "label,f0,f1,..." header then one row per sample.
void write_features_csv(std::ostream& os, const FeatureMatrix& X);
FeatureMatrix read_features_csv(std::istream& is);

void write_model_csv(std::ostream& os, const LinearModel& model);
LinearModel read_model_csv(std::istream& is);

}  // namespace gscat
