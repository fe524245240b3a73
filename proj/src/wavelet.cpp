#include "gscat/wavelet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "gscat/error.hpp"

namespace gscat {

Kernel::Kernel(GroupPtr group, std::size_t J) : group_(std::move(group)), J_(J) {
  if (!group_) fail(ErrorCode::Domain, "kernel needs a group");
  k_ = group_->num_classes();
  gamma_.assign((J_ + 1) * k_, cd(0.0, 0.0));
}

Kernel::Kernel(GroupPtr group, std::size_t J, std::vector<cd> gamma)
    : group_(std::move(group)), J_(J), gamma_(std::move(gamma)) {
  if (!group_) fail(ErrorCode::Domain, "kernel needs a group");
  k_ = group_->num_classes();
  if (gamma_.size() != (J_ + 1) * k_) {
    fail(ErrorCode::Domain, "kernel has " + std::to_string(gamma_.size()) + " coefficients, expected (J+1)k = " +
                                std::to_string((J_ + 1) * k_));
  }
  for (const auto& z : gamma_) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) fail(ErrorCode::Domain, "kernel entry is not finite");
  }
}

Kernel Kernel::conjugate() const {
  std::vector<cd> c(gamma_.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = std::conj(gamma_[i]);
  return Kernel(group_, J_, std::move(c));
}

Signal synthesize(const Kernel& kernel, std::size_t j) {
  if (j > kernel.J()) {
    fail(ErrorCode::Domain, "kernel row " + std::to_string(j) + " out of range 0.." + std::to_string(kernel.J()));
  }
  return class_function_from_coefficients(kernel.group_ptr(), kernel.row(j));
}

std::vector<double> calderon_sums(const Kernel& kernel) {
  std::vector<double> c(kernel.k(), 0.0);
  for (std::size_t j = 0; j < kernel.rows(); ++j)
    for (std::size_t r = 0; r < kernel.k(); ++r) c[r] += std::norm(kernel(j, r));
  return c;
}

double parseval_defect(const Kernel& kernel) {
  double worst = 0.0;
  for (double c : calderon_sums(kernel)) worst = std::max(worst, std::abs(c - 1.0));
  return worst;
}

bool is_parseval(const Kernel& kernel, double tol) { return parseval_defect(kernel) <= tol; }

Kernel normalize_parseval(const Kernel& raw) {
  Kernel out = raw;
  const auto sums = calderon_sums(raw);
  for (std::size_t r = 0; r < raw.k(); ++r) {
    if (sums[r] == 0.0) {
      out(0, r) = 1.0;
      continue;
    }
    const double s = std::sqrt(sums[r]);
    for (std::size_t j = 0; j < raw.rows(); ++j) out(j, r) = raw(j, r) / s;
  }
  return out;
}

Kernel normalize_parseval(const std::vector<Signal>& prototypes) {
  if (prototypes.empty()) fail(ErrorCode::Domain, "need at least one prototype");
  const auto& group = prototypes.front().group_ptr();
  const auto& G = *group;
  const std::size_t k = G.num_classes();
  Kernel raw(group, prototypes.size() - 1);
  for (std::size_t j = 0; j < prototypes.size(); ++j) {
    const auto& p = prototypes[j];
    if (!same_group(p.group(), G)) fail(ErrorCode::Domain, "prototypes live on different groups");
    // <p, chi^r> = (1/|G|) sum_x p(x) conj(chi^r(x))
    std::vector<cd> class_sums(k, cd(0.0, 0.0));
    for (std::uint32_t x = 0; x < G.order(); ++x) class_sums[G.class_of(x)] += p[x];
    for (std::size_t r = 0; r < k; ++r) {
      cd acc = 0.0;
      for (std::size_t c = 0; c < k; ++c) acc += class_sums[c] * std::conj(G.table()(r, c));
      raw(j, r) = acc / double(G.order());
    }
  }
  // expansion round-off would otherwise be blown up to unit size in empty columns
  double peak = 0.0;
  for (const auto& v : raw.coefficients()) peak = std::max(peak, std::abs(v));
  for (std::size_t j = 0; j < raw.rows(); ++j)
    for (std::size_t r = 0; r < k; ++r)
      if (std::abs(raw(j, r)) <= 1e-13 * peak) raw(j, r) = 0.0;
  return normalize_parseval(raw);
}

FrameReport frame_bounds(const Kernel& kernel, int trials, std::uint64_t seed) {
  FrameReport rep;
  const auto c = calderon_sums(kernel);
  rep.A = *std::min_element(c.begin(), c.end());
  rep.B = *std::max_element(c.begin(), c.end());
  rep.min_ratio = INFINITY;
  rep.max_ratio = 0.0;
  std::mt19937_64 rng(seed);
  for (int t = 0; t < trials; ++t) {
    const auto f = random_signal(kernel.group_ptr(), rng);
    const ClassConvolver conv(f);
    double energy = 0.0;
    for (std::size_t j = 0; j < kernel.rows(); ++j) energy += norm_squared(conv.apply(kernel.row(j)));
    const double ratio = energy / norm_squared(f);
    rep.min_ratio = std::min(rep.min_ratio, ratio);
    rep.max_ratio = std::max(rep.max_ratio, ratio);
  }
  if (trials <= 0) rep.min_ratio = rep.max_ratio = rep.A;
  rep.verified = rep.min_ratio >= rep.A * (1.0 - 1e-9) && rep.max_ratio <= rep.B * (1.0 + 1e-9);
  return rep;
}

std::vector<Signal> analyze(const Kernel& kernel, const Signal& f) {
  if (!same_group(kernel.group(), f.group())) fail(ErrorCode::Domain, "kernel and signal live on different groups");
  const ClassConvolver conv(f);
  std::vector<Signal> out;
  out.reserve(kernel.rows());
  for (std::size_t j = 0; j < kernel.rows(); ++j) out.push_back(conv.apply(kernel.row(j)));
  return out;
}

Signal reconstruct(const Kernel& kernel, const std::vector<Signal>& coefficients) {
  const auto c = calderon_sums(kernel);
  for (std::size_t r = 0; r < c.size(); ++r) {
    if (std::abs(c[r] - 1.0) > 1e-6) {
      fail(ErrorCode::Precondition, "Calderon condition fails at irreducible " + std::to_string(r) + " (sum " +
                                        std::to_string(c[r]) + ")");
    }
  }
  if (coefficients.size() != kernel.rows()) {
    fail(ErrorCode::Domain, "expected " + std::to_string(kernel.rows()) + " coefficient signals");
  }
  const auto dagger = kernel.conjugate();
  Signal f(kernel.group_ptr());
  for (std::size_t j = 0; j < kernel.rows(); ++j) {
    if (!same_group(coefficients[j].group(), kernel.group())) fail(ErrorCode::Domain, "coefficient group mismatch");
    // psi^dagger is a class function, so W * psi^dagger = psi^dagger * W.
    f += ClassConvolver(coefficients[j]).apply(dagger.row(j));
  }
  return f;
}

namespace {

void require_parseval(const Kernel& kernel) {
  const auto c = calderon_sums(kernel);
  for (std::size_t r = 0; r < c.size(); ++r) {
    if (std::abs(c[r] - 1.0) > 1e-9) {
      fail(ErrorCode::Precondition, "kernel is not Parseval at irreducible " + std::to_string(r) + " (sum " +
                                        std::to_string(c[r]) + ")");
    }
  }
}

void check_subset(const FiniteGroup& g, std::span<const std::size_t> S) {
  if (S.empty()) fail(ErrorCode::Domain, "irreducible subset S is empty");
  for (auto s : S) {
    if (s >= g.num_classes()) fail(ErrorCode::Domain, "irreducible index " + std::to_string(s) + " out of range");
  }
}

}  // namespace

AdmissibilityReport admissibility(const Kernel& kernel) {
  require_parseval(kernel);
  AdmissibilityReport rep;
  rep.beta = INFINITY;
  for (std::size_t r = 0; r < kernel.k(); ++r) {
    const double v = std::norm(kernel(0, r));
    rep.beta = std::min(rep.beta, v);
    rep.gamma0_max = std::max(rep.gamma0_max, v);
  }
  rep.beta = std::clamp(rep.beta, 0.0, 1.0);
  rep.alpha = 1.0 - rep.beta;
  return rep;
}

std::vector<long long> tensor_multiplicities(const FiniteGroup& g, std::span<const std::size_t> S) {
  check_subset(g, S);
  const std::size_t k = g.num_classes();
  const auto& t = g.table();
  std::vector<double> square(k, 0.0);  // |chi^{rho S}|^2 on each class
  for (std::size_t c = 0; c < k; ++c) {
    cd chi = 0.0;
    for (auto s : S) chi += double(t.degrees[s]) * t(s, c);
    square[c] = std::norm(chi);
  }
  std::vector<long long> n(k);
  for (std::size_t r = 0; r < k; ++r) {
    cd acc = 0.0;
    for (std::size_t c = 0; c < k; ++c) acc += double(g.class_size(c)) * square[c] * std::conj(t(r, c));
    acc /= double(g.order());
    const double rounded = std::round(acc.real());
    if (std::abs(acc.real() - rounded) > 1e-6 || std::abs(acc.imag()) > 1e-6) {
      fail(ErrorCode::NumericalIntegrity, "tensor multiplicity of irreducible " + std::to_string(r) +
                                              " is not an integer (" + std::to_string(acc.real()) + ")");
    }
    n[r] = (long long)rounded;
  }
  return n;
}

std::vector<std::size_t> tensor_support(const FiniteGroup& g, std::span<const std::size_t> S) {
  const auto n = tensor_multiplicities(g, S);
  std::vector<std::size_t> T;
  for (std::size_t r = 0; r < n.size(); ++r) {
    if (n[r] != 0) T.push_back(r);
  }
  return T;
}

long long subset_degree(const FiniteGroup& g, std::span<const std::size_t> S) {
  check_subset(g, S);
  long long d = 0;
  for (auto s : S) d += (long long)g.degree(s) * g.degree(s);
  return d;
}

AdmissibilityReport relaxed_admissibility(const Kernel& kernel, std::span<const std::size_t> S) {
  check_subset(kernel.group(), S);
  auto rep = admissibility(kernel);
  RelaxedAdmissibility rel;
  rel.S.assign(S.begin(), S.end());
  std::sort(rel.S.begin(), rel.S.end());
  rel.S.erase(std::unique(rel.S.begin(), rel.S.end()), rel.S.end());
  rel.T = tensor_support(kernel.group(), rel.S);
  rel.deg = subset_degree(kernel.group(), rel.S);
  double low = INFINITY;
  for (auto r : rel.T) low = std::min(low, std::norm(kernel(0, r)));
  rel.beta = double(rel.deg) / double(kernel.group().order()) * low;
  rel.alpha = 1.0 - rel.beta;
  rep.relaxed = rel;
  return rep;
}

KuehCheck kueh_bound_check(const Signal& f, std::span<const std::size_t> S) {
  const auto& g = f.group();
  check_subset(g, S);
  for (std::size_t x = 0; x < f.size(); ++x) {
    if (f[x].real() < 0.0 || std::abs(f[x].imag()) > 1e-12) {
      fail(ErrorCode::Precondition, "signal is not nonnegative at element " + std::to_string(x));
    }
  }
  std::vector<std::size_t> subset(S.begin(), S.end());
  std::sort(subset.begin(), subset.end());
  subset.erase(std::unique(subset.begin(), subset.end()), subset.end());
  const auto T = tensor_support(g, subset);
  const auto energies = spectral_energies(f);
  KuehCheck out;
  for (auto r : T) out.lhs += energies[r];
  out.rhs = double(subset_degree(g, subset)) / double(g.order()) * norm_squared(f);
  out.holds = out.lhs >= out.rhs - 1e-9;
  return out;
}

Kernel random_parseval_kernel(const GroupPtr& group, std::size_t J, std::mt19937_64& rng, bool complex_values,
                              double lowpass_floor) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Kernel raw(group, J);
  for (std::size_t r = 0; r < raw.k(); ++r) {
    for (std::size_t j = 0; j <= J; ++j) raw(j, r) = {normal(rng), complex_values ? normal(rng) : 0.0};
    if (lowpass_floor > 0.0) {
      // gamma~_0 in [floor, 1] and wavelet energy in [0, 1], so |gamma_0|^2 >= floor^2 / (floor^2 + 1)
      raw(0, r) = lowpass_floor + (1.0 - lowpass_floor) * unit(rng);
      double wave = 0.0;
      for (std::size_t j = 1; j <= J; ++j) wave += std::norm(raw(j, r));
      const double scale = wave > 0.0 ? std::sqrt(unit(rng) / wave) : 0.0;
      for (std::size_t j = 1; j <= J; ++j) raw(j, r) *= scale;
    }
  }
  return normalize_parseval(raw);
}

void write_kernel_csv(std::ostream& os, const Kernel& kernel) {
  os << "J,k,group\n" << kernel.J() << ',' << kernel.k() << ',' << kernel.group().descriptor() << '\n';
  char buf[64];
  for (std::size_t j = 0; j < kernel.rows(); ++j) {
    os << j;
    for (std::size_t r = 0; r < kernel.k(); ++r) {
      std::snprintf(buf, sizeof buf, ",%.17g,%.17g", kernel(j, r).real(), kernel(j, r).imag());
      os << buf;
    }
    os << '\n';
  }
}

Kernel read_kernel_csv(std::istream& is, GroupPtr group) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("J,k", 0) != 0) fail(ErrorCode::Format, "kernel CSV must start with 'J,k,group'");
  if (!std::getline(is, line)) fail(ErrorCode::Format, "kernel CSV is missing its size line");
  const auto c1 = line.find(',');
  const auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
  if (c2 == std::string::npos) fail(ErrorCode::Format, "kernel size line must be J,k,group");
  std::size_t J = 0, k = 0;
  try {
    J = std::stoull(line.substr(0, c1));
    k = std::stoull(line.substr(c1 + 1, c2 - c1 - 1));
  } catch (const std::exception&) {
    fail(ErrorCode::Format, "kernel size line is not numeric");
  }
  std::string descriptor = line.substr(c2 + 1);
  while (!descriptor.empty() && (descriptor.back() == '\r' || descriptor.back() == ' ')) descriptor.pop_back();
  if (!group) group = build_from_descriptor(descriptor);
  if (group->num_classes() != k) {
    fail(ErrorCode::Domain, "kernel has k = " + std::to_string(k) + " but " + group->descriptor() + " has " +
                                std::to_string(group->num_classes()) + " classes");
  }
  std::vector<cd> gamma((J + 1) * k);
  for (std::size_t j = 0; j <= J; ++j) {
    if (!std::getline(is, line)) fail(ErrorCode::Format, "kernel CSV is missing row " + std::to_string(j));
    std::istringstream ls(line);
    std::string field;
    std::getline(ls, field, ',');
    for (std::size_t r = 0; r < k; ++r) {
      std::string re, im;
      if (!std::getline(ls, re, ',') || !std::getline(ls, im, ',')) {
        fail(ErrorCode::Format, "kernel row " + std::to_string(j) + " has fewer than " + std::to_string(k) + " pairs");
      }
      try {
        gamma[j * k + r] = {std::stod(re), std::stod(im)};
      } catch (const std::exception&) {
        fail(ErrorCode::Format, "kernel row " + std::to_string(j) + " is not numeric");
      }
    }
  }
  return Kernel(group, J, std::move(gamma));
}

Kernel load_kernel_file(const std::string& path, GroupPtr group) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::FileNotFound, "cannot open kernel file '" + path + "'");
  return read_kernel_csv(in, std::move(group));
}

void save_kernel_file(const std::string& path, const Kernel& kernel) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::FileNotFound, "cannot write kernel file '" + path + "'");
  write_kernel_csv(out, kernel);
}

}  // namespace gscat
