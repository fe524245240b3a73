#include "gscat/scattering.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gscat/error.hpp"
#include "gscat/parallel.hpp"

namespace gscat {

namespace {

void require_parseval(const Kernel& kernel) {
  const double defect = parseval_defect(kernel);
  if (defect > 1e-9) {
    std::ostringstream os;
    os << "scattering needs a Parseval kernel (largest |C(r) - 1| is " << defect << ")";
    fail(ErrorCode::Precondition, os.str());
  }
}

void require_kernel_group(const Kernel& kernel, const Signal& f) {
  if (!same_group(kernel.group(), f.group()))
    fail(ErrorCode::Domain, "signal on " + f.group().descriptor() + " but kernel on " + kernel.group().descriptor());
}

bool is_nonnegative(const Signal& f) {
  for (const auto& v : f.values())
    if (v.imag() != 0.0 || v.real() < 0.0) return false;
  return true;
}

}  // namespace

Path Path::extended(int j) const {
  Path p = *this;
  p.steps.push_back(j);
  return p;
}

std::string Path::to_string() const {
  std::string s = "(";
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(steps[i]);
  }
  return s + ")";
}

std::string Path::file_stem() const {
  if (steps.empty()) return "root";
  std::string s = "p";
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (i) s += '_';
    s += std::to_string(steps[i]);
  }
  return s;
}

std::vector<Path> paths_of_length(std::size_t J, std::size_t m) {
  std::vector<Path> layer{Path{}};
  for (std::size_t d = 0; d < m; ++d) {
    std::vector<Path> next;
    next.reserve(layer.size() * J);
    for (const auto& p : layer)
      for (std::size_t j = 1; j <= J; ++j) next.push_back(p.extended(int(j)));
    layer = std::move(next);
  }
  return layer;
}

std::size_t feature_count(std::size_t J, std::size_t M) {
  std::size_t total = 0, layer = 1;
  for (std::size_t m = 0; m <= M; ++m) {
    total += layer;
    layer *= J;
  }
  return total;
}

double ScatteringOutput::feature_energy() const {
  double e = 0.0;
  for (double v : layer_feature_energy) e += v;
  return e;
}

double ScatteringOutput::tail_energy() const {
  if (layer_propagated_energy.size() < depth + 2) fail(ErrorCode::Precondition, "tail layer was not computed");
  return layer_propagated_energy[depth + 1];
}

std::vector<cd> ScatteringOutput::flatten() const {
  std::vector<cd> out;
  for (const auto& [p, s] : features) out.insert(out.end(), s.values().begin(), s.values().end());
  return out;
}

Signal propagate(const Kernel& kernel, const Signal& f, const Path& p) {
  require_kernel_group(kernel, f);
  Signal u = f;
  for (int j : p.steps) {
    if (j < 1 || std::size_t(j) > kernel.J())
      fail(ErrorCode::Domain, "path step " + std::to_string(j) + " outside 1.." + std::to_string(kernel.J()));
    u = modulus(ClassConvolver(u).apply(kernel.row(std::size_t(j))));
  }
  return u;
}

double scatter_cost(std::size_t J, std::size_t M, std::size_t order) {
  double nodes = 0.0, layer = 1.0;
  for (std::size_t m = 0; m <= M; ++m) {
    nodes += layer;
    layer *= double(J);
  }
  return nodes * double(J + 1) * double(order) * double(order);
}

ScatteringOutput scatter(const Kernel& kernel, const Signal& f, std::size_t M, const ScatterOptions& options) {
  require_kernel_group(kernel, f);
  require_parseval(kernel);
  const std::size_t J = kernel.J();
  const double cost = scatter_cost(J, M, f.size());
  if (cost > options.budget) {
    std::ostringstream os;
    os << "scattering with J = " << J << ", M = " << M << " on a group of order " << f.size() << " needs about "
       << cost << " operations, over the budget of " << options.budget << "; use a smaller M or J";
    fail(ErrorCode::Capacity, os.str());
  }

  ScatteringOutput out;
  out.depth = M;
  out.J = J;
  std::vector<Path> paths{Path{}};
  std::vector<Signal> layer{f};
  out.layer_propagated_energy.push_back(norm_squared(f));
  // small layers are not worth a thread pool
  const unsigned threads = f.size() * f.size() < 4096 ? 1u : options.threads;

  for (std::size_t m = 0; m <= M; ++m) {
    const bool need_next = J > 0 && (m < M || options.with_tail);
    const std::size_t nodes = paths.size();
    std::vector<Signal> features(nodes);
    std::vector<Signal> next(need_next ? nodes * J : 0);
    parallel_for(nodes, threads, [&](std::size_t i) {
      ClassConvolver conv(layer[i]);
      features[i] = conv.apply(kernel.row(0));
      if (need_next)
        for (std::size_t j = 1; j <= J; ++j) next[i * J + j - 1] = modulus(conv.apply(kernel.row(j)));
    });

    double es = 0.0;
    for (std::size_t i = 0; i < nodes; ++i) {
      es += norm_squared(features[i]);
      out.features.emplace(paths[i], std::move(features[i]));
    }
    out.layer_feature_energy.push_back(es);
    if (options.keep_propagated)
      for (std::size_t i = 0; i < nodes; ++i) out.propagated.emplace(paths[i], layer[i]);

    if (!need_next) {
      // J = 0 has no wavelet paths, deeper layers are empty
      if (J == 0) {
        for (std::size_t d = m + 1; d <= M; ++d) out.layer_feature_energy.push_back(0.0);
        const std::size_t ulayers = options.with_tail ? M + 2 : M + 1;
        while (out.layer_propagated_energy.size() < ulayers) out.layer_propagated_energy.push_back(0.0);
      }
      break;
    }
    std::vector<Path> next_paths;
    next_paths.reserve(nodes * J);
    double eu = 0.0;
    for (std::size_t i = 0; i < nodes; ++i)
      for (std::size_t j = 1; j <= J; ++j) {
        next_paths.push_back(paths[i].extended(int(j)));
        eu += norm_squared(next[i * J + j - 1]);
      }
    out.layer_propagated_energy.push_back(eu);
    paths = std::move(next_paths);
    layer = std::move(next);
    if (m == M && options.keep_propagated)
      for (std::size_t i = 0; i < paths.size(); ++i) out.propagated.emplace(paths[i], layer[i]);
  }
  return out;
}

EnergySplit check_energy_split(const Kernel& kernel, const Signal& f, std::size_t m) {
  ScatterOptions opt;
  opt.with_tail = true;
  const auto out = scatter(kernel, f, m, opt);
  EnergySplit r;
  r.propagated = out.layer_propagated_energy[m];
  r.propagated_next = out.layer_propagated_energy[m + 1];
  r.features = out.layer_feature_energy[m];
  r.residual = std::abs(r.propagated - r.propagated_next - r.features);
  r.holds = r.residual <= 1e-9 * std::max(r.propagated, norm_squared(f));
  return r;
}

BoundCheck check_nonexpansive(const Kernel& kernel, const Signal& f, std::size_t M) {
  ScatterOptions opt;
  opt.with_tail = false;
  BoundCheck r;
  r.lhs = scatter(kernel, f, M, opt).feature_energy();
  r.rhs = norm_squared(f);
  r.holds = r.lhs <= r.rhs * (1 + 1e-9);
  return r;
}

BoundCheck check_stability(const Kernel& kernel, const Signal& f, const Signal& f2, std::size_t M) {
  require_same_group(f, f2);
  ScatterOptions opt;
  opt.with_tail = false;
  const auto a = scatter(kernel, f, M, opt);
  const auto b = scatter(kernel, f2, M, opt);
  BoundCheck r;
  for (const auto& [p, s] : a.features) r.lhs += distance_squared(s, b.features.at(p));
  r.rhs = distance_squared(f, f2);
  r.holds = r.lhs <= r.rhs * (1 + 1e-9);
  return r;
}

BoundCheck check_injectivity(const Kernel& kernel, const Signal& f, const Signal& f2) {
  require_same_group(f, f2);
  const auto adm = admissibility(kernel);
  const Signal d = f - f2;
  BoundCheck r;
  r.lhs = norm_squared(ClassConvolver(d).apply(kernel.row(0)));
  r.rhs = adm.beta * norm_squared(d);
  r.holds = r.lhs >= r.rhs * (1 - 1e-9);
  return r;
}

EnergyPreservation check_energy_preservation(const Kernel& kernel, const Signal& f, std::size_t M,
                                             std::optional<std::vector<std::size_t>> S) {
  require_kernel_group(kernel, f);
  const auto adm = admissibility(kernel);
  EnergyPreservation r;
  // exponent of alpha bounding layer m: m, or m - 1 on the relaxed route with a signed input
  std::size_t shift = 0;
  if (adm.beta > 0.0) {
    r.alpha = adm.alpha;
  } else {
    std::optional<RelaxedAdmissibility> rel;
    if (S) rel = relaxed_admissibility(kernel, *S).relaxed;
    if (!rel || rel->beta <= 0.0)
      fail(ErrorCode::Precondition,
           "kernel is not admissible: the low-pass vanishes on some irreducible and no subset with "
           "positive relaxed constant was given");
    r.alpha = rel->alpha;
    r.relaxed = true;
    shift = is_nonnegative(f) ? 0 : 1;
  }
  auto exponent = [&](std::size_t m) { return m > shift ? double(m - shift) : 0.0; };

  ScatterOptions opt;
  opt.with_tail = true;
  const auto out = scatter(kernel, f, M, opt);
  r.energy = norm_squared(f);
  r.captured = out.feature_energy();
  r.tail = out.tail_energy();
  r.identity_residual = std::abs(r.energy - r.captured - r.tail);
  r.tail_bound = std::pow(r.alpha, exponent(M + 1)) * r.energy;
  const double slack = 1e-9 * r.energy;
  r.holds = r.identity_residual <= slack && r.tail <= r.tail_bound + slack;
  for (std::size_t m = 0; m <= M; ++m) {
    BoundCheck b;
    b.lhs = out.layer_feature_energy[m];
    b.rhs = adm.gamma0_max * std::pow(r.alpha, exponent(m)) * r.energy;
    b.holds = b.lhs <= b.rhs + slack;
    r.holds = r.holds && b.holds;
    r.layer_bounds.push_back(b);
  }
  return r;
}

EquivarianceReport check_equivariance(const Kernel& kernel, const Signal& f, std::uint32_t g, std::size_t M) {
  require_kernel_group(kernel, f);
  if (g >= f.size()) fail(ErrorCode::Domain, "element " + std::to_string(g) + " outside the group");
  ScatterOptions opt;
  opt.with_tail = false;
  const auto base = scatter(kernel, f, M, opt);
  const auto left = scatter(kernel, translate_left(f, g), M, opt);
  const auto right = scatter(kernel, translate_right(f, g), M, opt);
  EquivarianceReport r;
  for (const auto& [p, s] : base.features) {
    r.left = std::max(r.left, max_abs_difference(left.features.at(p), translate_left(s, g)));
    r.right = std::max(r.right, max_abs_difference(right.features.at(p), translate_right(s, g)));
  }
  double scale = 1.0;
  for (const auto& v : f.values()) scale = std::max(scale, std::abs(v));
  r.holds = r.left <= 1e-9 * scale && r.right <= 1e-9 * scale;
  return r;
}

std::vector<InvarianceLayer> check_approx_invariance(const Kernel& kernel, const Signal& f, std::uint32_t g,
                                                     std::size_t M) {
  require_kernel_group(kernel, f);
  if (g >= f.size()) fail(ErrorCode::Domain, "element " + std::to_string(g) + " outside the group");
  const auto adm = admissibility(kernel);
  if (adm.beta <= 0.0) fail(ErrorCode::Precondition, "approximate invariance needs an admissible kernel (beta = 0)");
  ScatterOptions opt;
  opt.with_tail = false;
  const auto base = scatter(kernel, f, M, opt);
  const auto left = scatter(kernel, translate_left(f, g), M, opt);
  const auto right = scatter(kernel, translate_right(f, g), M, opt);
  const double energy = norm_squared(f);
  std::vector<InvarianceLayer> layers(M + 1);
  for (const auto& [p, s] : base.features) {
    layers[p.depth()].lhs += distance_squared(left.features.at(p), s);
    layers[p.depth()].lhs_right += distance_squared(right.features.at(p), s);
  }
  for (std::size_t m = 0; m <= M; ++m) {
    auto& l = layers[m];
    l.bound = 4.0 * adm.gamma0_max * std::pow(adm.alpha, double(m)) * energy;
    l.holds = l.lhs <= l.bound + 1e-9 && l.lhs_right <= l.bound + 1e-9;
  }
  return layers;
}

}  // namespace gscat
