#include "gscat/ml.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>

#include "gscat/error.hpp"
#include "gscat/parallel.hpp"

namespace gscat {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void require_finite(const FeatureMatrix& X) {
  for (std::size_t i = 0; i < X.data.size(); ++i)
    if (!std::isfinite(X.data[i]))
      fail(ErrorCode::Domain, "non-finite feature at row " + std::to_string(i / std::max<std::size_t>(X.cols, 1)));
}

void check_shape(const FeatureMatrix& X) {
  if (X.data.size() != X.rows * X.cols || X.labels.size() != X.rows)
    fail(ErrorCode::Domain, "feature matrix storage does not match its shape");
}

template <class T>
void put(std::ostream& os, T v) {
  static_assert(std::endian::native == std::endian::little);
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& is, const char* what) {
  T v{};
  const auto at = is.tellg();
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v))
    fail(ErrorCode::Format, std::string("truncated feature file reading ") + what + " at byte " +
                                std::to_string(static_cast<long long>(at)));
  return v;
}

std::vector<double> parse_doubles(const std::string& line, std::size_t skip, std::string* head = nullptr) {
  std::vector<double> out;
  std::stringstream ss(line);
  std::string cell;
  for (std::size_t i = 0; std::getline(ss, cell, ','); ++i) {
    if (i < skip) {
      if (head && i == 0) *head = cell;
      continue;
    }
    try {
      std::size_t used = 0;
      out.push_back(std::stod(cell, &used));
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::logic_error&) {
      fail(ErrorCode::Format, "bad number '" + cell + "'");
    }
  }
  return out;
}

void write_row(std::ostream& os, const std::string& head, const std::vector<double>& v, std::size_t from,
               std::size_t count) {
  os << head;
  char buf[32];
  for (std::size_t i = 0; i < count; ++i) {
    std::snprintf(buf, sizeof buf, ",%.17g", v[from + i]);
    os << buf;
  }
  os << '\n';
}

}  // namespace

std::vector<double> featurize(const ScatteringOutput& out) {
  std::vector<double> f;
  for (const auto& [p, s] : out.features) {
    for (const auto& v : s.values()) f.push_back(v.real());
    for (const auto& v : s.values()) f.push_back(v.imag());
  }
  return f;
}

FeatureMatrix featurize(const std::vector<ScatteringOutput>& outputs, const std::vector<int>& labels) {
  if (outputs.size() != labels.size()) fail(ErrorCode::Domain, "outputs and labels differ in length");
  FeatureMatrix X;
  X.rows = outputs.size();
  X.labels = labels;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    const auto& o = outputs[i];
    if (i == 0) {
      for (const auto& [p, s] : o.features) X.manifest.push_back(p.to_string());
    } else {
      const auto& first = outputs.front();
      bool same = o.features.size() == first.features.size() && o.depth == first.depth && o.J == first.J;
      if (same) {
        auto a = o.features.begin();
        for (auto b = first.features.begin(); b != first.features.end(); ++a, ++b)
          if (!(a->first == b->first) || a->second.size() != b->second.size() ||
              !same_group(a->second.group(), b->second.group())) {
            same = false;
            break;
          }
      }
      if (!same) fail(ErrorCode::Domain, "scattering output " + std::to_string(i) + " differs in shape from the first");
    }
    const auto row = featurize(o);
    if (i == 0) X.cols = row.size();
    X.data.insert(X.data.end(), row.begin(), row.end());
  }
  return X;
}

FeatureMatrix raw_features(const std::vector<Signal>& signals, const std::vector<int>& labels) {
  if (signals.size() != labels.size()) fail(ErrorCode::Domain, "signals and labels differ in length");
  FeatureMatrix X;
  X.rows = signals.size();
  X.labels = labels;
  X.manifest = {"signal"};
  for (std::size_t i = 0; i < signals.size(); ++i) {
    if (i && !same_group(signals[i].group(), signals.front().group()))
      fail(ErrorCode::Domain, "signal " + std::to_string(i) + " lives on a different group");
    for (const auto& v : signals[i].values()) X.data.push_back(v.real());
    for (const auto& v : signals[i].values()) X.data.push_back(v.imag());
  }
  X.cols = signals.empty() ? 0 : 2 * signals.front().size();
  return X;
}

std::vector<double> PcaBasis::transform(const double* x) const {
  std::vector<double> out(dim(), 0.0);
  for (std::size_t c = 0; c < dim(); ++c) {
    const double* w = components.data() + c * input_dim;
    double s = 0.0;
    for (std::size_t j = 0; j < input_dim; ++j) s += w[j] * (x[j] - mean[j]);
    out[c] = s;
  }
  return out;
}

FeatureMatrix PcaBasis::transform(const FeatureMatrix& X) const {
  check_shape(X);
  if (X.cols != input_dim)
    fail(ErrorCode::Domain, "PCA expects " + std::to_string(input_dim) + " features, got " + std::to_string(X.cols));
  FeatureMatrix out;
  out.rows = X.rows;
  out.cols = dim();
  out.labels = X.labels;
  out.manifest = {"pca"};
  RowMatrix centered = Eigen::Map<const RowMatrix>(X.data.data(), Eigen::Index(X.rows), Eigen::Index(X.cols));
  centered.rowwise() -= Eigen::Map<const Eigen::RowVectorXd>(mean.data(), Eigen::Index(input_dim));
  const Eigen::Map<const RowMatrix> W(components.data(), Eigen::Index(dim()), Eigen::Index(input_dim));
  RowMatrix Y = centered * W.transpose();
  out.data.assign(Y.data(), Y.data() + Y.size());
  return out;
}

PcaBasis pca_fit(const FeatureMatrix& X, std::size_t d) {
  check_shape(X);
  require_finite(X);
  if (X.rows == 0 || X.cols == 0) fail(ErrorCode::Domain, "PCA on an empty matrix");
  const std::size_t cap = std::min(X.rows, X.cols);
  if (d > cap) {
    std::cerr << "warning: PCA dimension " << d << " clipped to " << cap << "\n";
    d = cap;
  }
  const auto n = Eigen::Index(X.rows), p = Eigen::Index(X.cols);
  const Eigen::Map<const RowMatrix> A(X.data.data(), n, p);
  const Eigen::RowVectorXd mu = A.colwise().mean();
  RowMatrix Xc = A.rowwise() - mu;

  PcaBasis basis;
  basis.input_dim = X.cols;
  basis.mean.assign(mu.data(), mu.data() + p);
  // eigen-decompose whichever of the covariance and Gram matrices is smaller
  const bool gram = n < p;
  Eigen::MatrixXd M = gram ? Eigen::MatrixXd(Xc * Xc.transpose()) : Eigen::MatrixXd(Xc.transpose() * Xc);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  if (es.info() != Eigen::Success) fail(ErrorCode::NumericalIntegrity, "PCA eigensolver did not converge");
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double top = std::max(ev(ev.size() - 1), 0.0);
  std::size_t usable = 0;
  while (usable < d && top > 0.0 && ev(ev.size() - 1 - Eigen::Index(usable)) > 1e-12 * top) ++usable;
  if (usable < d) {
    std::cerr << "warning: PCA dimension " << d << " clipped to the data rank " << usable << "\n";
    d = usable;
  }
  basis.components.resize(d * X.cols);
  basis.variances.resize(d);
  for (std::size_t c = 0; c < d; ++c) {
    const Eigen::Index col = ev.size() - 1 - Eigen::Index(c);
    Eigen::VectorXd v = gram ? Eigen::VectorXd(Xc.transpose() * es.eigenvectors().col(col)) : es.eigenvectors().col(col);
    v.normalize();
    // fix the sign so the largest entry is positive
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
    std::copy(v.data(), v.data() + p, basis.components.begin() + std::ptrdiff_t(c * X.cols));
    basis.variances[c] = ev(col) / double(std::max<Eigen::Index>(n - 1, 1));
  }
  return basis;
}

std::vector<double> LinearModel::decision_values(const double* x) const {
  std::vector<double> z;
  const double* in = x;
  if (!pca.empty()) {
    z = pca.transform(x);
    in = z.data();
  }
  std::vector<double> u(dim);
  for (std::size_t j = 0; j < dim; ++j) u[j] = (in[j] - shift[j]) * scale[j];
  std::vector<double> out(static_cast<std::size_t>(classes));
  for (int c = 0; c < classes; ++c) {
    const double* w = weights.data() + std::size_t(c) * dim;
    double s = bias[std::size_t(c)];
    for (std::size_t j = 0; j < dim; ++j) s += w[j] * u[j];
    out[std::size_t(c)] = s;
  }
  return out;
}

int LinearModel::predict(const double* x) const {
  const auto d = decision_values(x);
  return int(std::max_element(d.begin(), d.end()) - d.begin());
}

LinearModel svm_train(const FeatureMatrix& X, const SvmOptions& options) {
  check_shape(X);
  require_finite(X);
  if (X.rows == 0) fail(ErrorCode::DegenerateLabel, "no training samples");
  int classes = 0;
  for (int l : X.labels) {
    if (l < 0) fail(ErrorCode::DegenerateLabel, "negative label " + std::to_string(l));
    classes = std::max(classes, l + 1);
  }
  {
    std::vector<int> seen(std::size_t(classes), 0);
    for (int l : X.labels) seen[std::size_t(l)] = 1;
    const int present = std::accumulate(seen.begin(), seen.end(), 0);
    if (present < 2) fail(ErrorCode::DegenerateLabel, "training data has a single class");
  }
  if (!(options.C > 0) || options.epochs <= 0) fail(ErrorCode::InvalidParameter, "C and epochs must be positive");

  const std::size_t n = X.rows, d = X.cols;
  LinearModel model;
  model.classes = classes;
  model.dim = d;
  model.shift.assign(d, 0.0);
  model.scale.assign(d, 1.0);
  if (options.standardize) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) model.shift[j] += X(i, j);
    for (auto& v : model.shift) v /= double(n);
    std::vector<double> var(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        const double t = X(i, j) - model.shift[j];
        var[j] += t * t;
      }
    for (std::size_t j = 0; j < d; ++j) {
      const double sd = std::sqrt(var[j] / double(n));
      model.scale[j] = sd > 1e-12 ? 1.0 / sd : 1.0;
    }
  }
  std::vector<double> U(n * d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) U[i * d + j] = (X(i, j) - model.shift[j]) * model.scale[j];

  model.weights.assign(std::size_t(classes) * d, 0.0);
  model.bias.assign(std::size_t(classes), 0.0);
  const double lambda = 1.0 / (options.C * double(n));
  parallel_for(std::size_t(classes), options.threads, [&](std::size_t c) {
    // w = a * v keeps the shrink step O(1); the bias is weight d
    std::vector<double> v(d + 1, 0.0);
    double a = 1.0;
    std::mt19937_64 rng(options.seed * 1000003ULL + c);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::uint64_t t = 0;
    for (int e = 0; e < options.epochs; ++e) {
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t i : order) {
        ++t;
        const double eta = 1.0 / (lambda * double(t));
        const double y = X.labels[i] == int(c) ? 1.0 : -1.0;
        const double* x = U.data() + i * d;
        double score = v[d];
        for (std::size_t j = 0; j < d; ++j) score += v[j] * x[j];
        score *= a;
        const double shrink = 1.0 - eta * lambda;
        if (shrink <= 0.0) {
          std::fill(v.begin(), v.end(), 0.0);
          a = 1.0;
        } else {
          a *= shrink;
        }
        if (y * score < 1.0) {
          const double step = eta * y / a;
          for (std::size_t j = 0; j < d; ++j) v[j] += step * x[j];
          v[d] += step;
        }
        if (a < 1e-100) {
          for (auto& w : v) w *= a;
          a = 1.0;
        }
      }
    }
    for (std::size_t j = 0; j < d; ++j) model.weights[c * d + j] = a * v[j];
    model.bias[c] = a * v[d];
  });
  return model;
}

std::vector<int> svm_predict(const LinearModel& model, const FeatureMatrix& X) {
  check_shape(X);
  const std::size_t expect = model.pca.empty() ? model.dim : model.pca.input_dim;
  if (X.cols != expect)
    fail(ErrorCode::Domain, "model expects " + std::to_string(expect) + " features, got " + std::to_string(X.cols));
  std::vector<int> out(X.rows);
  for (std::size_t i = 0; i < X.rows; ++i) out[i] = model.predict(X.row(i));
  return out;
}

LinearModel fit_classifier(const FeatureMatrix& X, std::size_t pca_dim, const SvmOptions& options) {
  if (pca_dim == 0) return svm_train(X, options);
  auto basis = pca_fit(X, pca_dim);
  auto model = svm_train(basis.transform(X), options);
  model.pca = std::move(basis);
  return model;
}

Evaluation evaluate(const LinearModel& model, const FeatureMatrix& X) {
  const auto pred = svm_predict(model, X);
  Evaluation e;
  e.total = X.rows;
  for (std::size_t i = 0; i < X.rows; ++i) e.correct += pred[i] == X.labels[i];
  return e;
}

void write_features_binary(std::ostream& os, const FeatureMatrix& X) {
  check_shape(X);
  put<std::uint64_t>(os, X.rows);
  put<std::uint64_t>(os, X.cols);
  for (int l : X.labels) put<std::int64_t>(os, l);
  for (double v : X.data) put<double>(os, v);
}

FeatureMatrix read_features_binary(std::istream& is) {
  FeatureMatrix X;
  X.rows = get<std::uint64_t>(is, "row count");
  X.cols = get<std::uint64_t>(is, "column count");
  if (X.rows > (1ULL << 32) || X.cols > (1ULL << 32)) fail(ErrorCode::Format, "implausible feature matrix shape");
  X.labels.resize(X.rows);
  for (auto& l : X.labels) l = int(get<std::int64_t>(is, "labels"));
  X.data.resize(X.rows * X.cols);
  for (auto& v : X.data) v = get<double>(is, "values");
  return X;
}

void write_features_csv(std::ostream& os, const FeatureMatrix& X) {
  check_shape(X);
  os << "label";
  for (std::size_t j = 0; j < X.cols; ++j) os << ",f" << j;
  os << '\n';
  for (std::size_t i = 0; i < X.rows; ++i) write_row(os, std::to_string(X.labels[i]), X.data, i * X.cols, X.cols);
}

FeatureMatrix read_features_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("label", 0) != 0) fail(ErrorCode::Format, "missing feature CSV header");
  FeatureMatrix X;
  X.cols = std::size_t(std::count(line.begin(), line.end(), ','));
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto all = parse_doubles(line, 0);
    if (all.size() != X.cols + 1) fail(ErrorCode::Format, "feature CSV line " + std::to_string(lineno) + " has wrong width");
    X.labels.push_back(int(all[0]));
    X.data.insert(X.data.end(), all.begin() + 1, all.end());
    ++X.rows;
  }
  return X;
}

void write_model_csv(std::ostream& os, const LinearModel& model) {
  os << "linear_model," << model.classes << ',' << model.dim << ',' << model.pca.input_dim << ',' << model.pca.dim()
     << '\n';
  if (!model.pca.empty()) {
    write_row(os, "pca_mean", model.pca.mean, 0, model.pca.input_dim);
    write_row(os, "pca_variance", model.pca.variances, 0, model.pca.dim());
    for (std::size_t c = 0; c < model.pca.dim(); ++c)
      write_row(os, "pca_component", model.pca.components, c * model.pca.input_dim, model.pca.input_dim);
  }
  write_row(os, "shift", model.shift, 0, model.dim);
  write_row(os, "scale", model.scale, 0, model.dim);
  for (int c = 0; c < model.classes; ++c) {
    std::vector<double> row{model.bias[std::size_t(c)]};
    row.insert(row.end(), model.weights.begin() + std::ptrdiff_t(std::size_t(c) * model.dim),
               model.weights.begin() + std::ptrdiff_t(std::size_t(c + 1) * model.dim));
    write_row(os, "class", row, 0, row.size());
  }
}

LinearModel read_model_csv(std::istream& is) {
  std::string line, head;
  if (!std::getline(is, line)) fail(ErrorCode::Format, "empty model file");
  const auto shape = parse_doubles(line, 1, &head);
  if (shape.size() != 4) fail(ErrorCode::Format, "bad model header");
  std::stringstream hs(line);
  std::getline(hs, head, ',');
  if (head != "linear_model") fail(ErrorCode::Format, "not a linear model file");
  LinearModel m;
  m.classes = int(shape[0]);
  m.dim = std::size_t(shape[1]);
  const auto pin = std::size_t(shape[2]), pdim = std::size_t(shape[3]);
  auto expect_row = [&](const std::string& tag, std::size_t width) {
    if (!std::getline(is, line)) fail(ErrorCode::Format, "model file ends before " + tag);
    std::string got;
    auto v = parse_doubles(line, 1, &got);
    if (got != tag || v.size() != width) fail(ErrorCode::Format, "expected a " + tag + " row of width " + std::to_string(width));
    return v;
  };
  if (pin) {
    m.pca.input_dim = pin;
    m.pca.mean = expect_row("pca_mean", pin);
    m.pca.variances = expect_row("pca_variance", pdim);
    for (std::size_t c = 0; c < pdim; ++c) {
      const auto comp = expect_row("pca_component", pin);
      m.pca.components.insert(m.pca.components.end(), comp.begin(), comp.end());
    }
  }
  m.shift = expect_row("shift", m.dim);
  m.scale = expect_row("scale", m.dim);
  for (int c = 0; c < m.classes; ++c) {
    const auto row = expect_row("class", m.dim + 1);
    m.bias.push_back(row[0]);
    m.weights.insert(m.weights.end(), row.begin() + 1, row.end());
  }
  return m;
}

}  // namespace gscat
