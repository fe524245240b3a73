#include "gscat/kernel_learning.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <regex>
#include <sstream>

#include "gscat/error.hpp"

namespace gscat {

namespace {

double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

// Completes rows 1..J with gamma_0 = sqrt(1 - sum_j |gamma_j|^2).
Kernel complete_lowpass(const GroupPtr& group, const std::vector<std::vector<double>>& rows, ErrorCode code,
                        const std::string& what) {
  const std::size_t k = group->num_classes();
  Kernel kernel(group, rows.size());
  for (std::size_t r = 0; r < k; ++r) {
    double s = 0.0;
    for (std::size_t j = 0; j < rows.size(); ++j) {
      kernel(j + 1, r) = rows[j][r];
      s += rows[j][r] * rows[j][r];
    }
    if (s >= 1.0) {
      std::ostringstream os;
      os << what << ": wavelet energy " << s << " >= 1 at irreducible " << r;
      fail(code, os.str());
    }
    kernel(0, r) = std::sqrt(1.0 - s);
  }
  return kernel;
}

std::vector<double> magnitudes(const Signal& f) {
  const auto& g = f.group();
  std::vector<double> out(g.num_classes());
  for (std::size_t r = 0; r < out.size(); ++r) {
    cd s = 0.0;
    for (std::uint32_t x = 0; x < f.size(); ++x) s += f[x] * std::conj(g.character(r, x));
    out[r] = std::abs(s / double(f.size()));
  }
  return out;
}

GroupPtr common_group(const std::vector<Signal>& signals) {
  if (signals.empty()) fail(ErrorCode::InvalidParameter, "no training signals");
  for (const auto& s : signals) require_same_group(signals.front(), s);
  return signals.front().group_ptr();
}

}  // namespace

double evaluate_prototype(const PrototypeSpec& spec, double x, double y) {
  switch (spec.family) {
    case PrototypeFamily::Constant:
      return spec.value;
    case PrototypeFamily::MexicanHat: {
      const double q = (x * x + y * y) / (2 * spec.sigma * spec.sigma);
      return (1 - q) * std::exp(-q);
    }
    case PrototypeFamily::Shannon: {
      const double c = std::cos(spec.theta), s = std::sin(spec.theta);
      const double u = spec.dilation * (c * x - s * y);
      const double v = spec.dilation * (s * x + c * y);
      return std::sin(spec.fx * u) * sinc(u) * std::sin(spec.fy * v) * sinc(v);
    }
  }
  return 0.0;
}

GridShape grid_shape(const FiniteGroup& g) {
  static const std::regex product(R"(product\(cyclic\((\d+)\),cyclic\((\d+)\)\))");
  static const std::regex cyclic(R"(cyclic\((\d+)\))");
  std::smatch m;
  const std::string& d = g.descriptor();
  if (std::regex_match(d, m, product)) return {std::stoul(m[1]), std::stoul(m[2])};
  if (std::regex_match(d, m, cyclic)) return {std::stoul(m[1]), 1};
  fail(ErrorCode::Domain, "prototypes need a group cyclic(n) or product(cyclic(n),cyclic(m)), got " + d);
}

Signal sample_prototype(const PrototypeSpec& spec, const GroupPtr& grid) {
  if (spec.family == PrototypeFamily::MexicanHat && !(spec.sigma > 0))
    fail(ErrorCode::InvalidParameter, "Mexican hat sigma must be positive");
  if (spec.family == PrototypeFamily::Shannon && !(spec.dilation > 0 && spec.fx > 0 && spec.fy > 0))
    fail(ErrorCode::InvalidParameter, "Shannon frequencies and dilation must be positive");
  const auto [n, m] = grid_shape(*grid);
  std::vector<double> v(n * m);
  const long hn = long(n / 2), hm = long(m / 2);
  for (long x = -hn; x < long(n) - hn; ++x)
    for (long y = -hm; y < long(m) - hm; ++y) {
      const std::size_t i = std::size_t((x + long(n)) % long(n));
      const std::size_t j = std::size_t((y + long(m)) % long(m));
      v[i * m + j] = evaluate_prototype(spec, double(x), double(y));
    }
  return Signal::from_real(grid, v);
}

std::vector<PrototypeSpec> default_prototype_specs(std::size_t J) {
  std::vector<PrototypeSpec> specs(1);
  const std::size_t first_band = (J + 1) / 2;
  for (std::size_t i = 1; i <= J; ++i) {
    PrototypeSpec s;
    s.family = PrototypeFamily::Shannon;
    s.theta = std::numbers::pi * double(i - 1) / double(J);
    s.dilation = i > first_band ? 0.5 : 1.0;
    specs.push_back(s);
  }
  return specs;
}

Kernel prototype_kernel(const std::vector<PrototypeSpec>& specs, const GroupPtr& grid) {
  if (specs.empty()) fail(ErrorCode::InvalidParameter, "at least the low-pass prototype is needed");
  std::vector<Signal> protos;
  for (std::size_t j = 0; j < specs.size(); ++j) {
    auto p = sample_prototype(specs[j], grid);
    double peak = 0.0;
    for (const auto& v : p.values()) peak = std::max(peak, std::abs(v));
    if (peak <= 1e-12)
      fail(ErrorCode::DegeneratePrototype, "prototype " + std::to_string(j) + " vanishes on the whole grid");
    protos.push_back(std::move(p));
  }
  return normalize_parseval(protos);
}

std::vector<double> class_mean_magnitudes(const GroupPtr& group, const std::vector<Signal>& signals) {
  std::vector<double> c(group->num_classes(), 0.0);
  for (const auto& f : signals) {
    if (!same_group(f.group(), *group)) fail(ErrorCode::Domain, "training signal on " + f.group().descriptor());
    const auto m = magnitudes(f);
    for (std::size_t r = 0; r < c.size(); ++r) c[r] += m[r];
  }
  if (!signals.empty())
    for (auto& v : c) v /= double(signals.size());
  return c;
}

Kernel affine_twoclass_kernel(const GroupPtr& group, const std::vector<Signal>& class_b,
                              const std::vector<Signal>& class_m) {
  if (class_b.empty() && class_m.empty()) fail(ErrorCode::InvalidParameter, "both training sets are empty");
  const auto cb = class_mean_magnitudes(group, class_b);
  const auto cm = class_mean_magnitudes(group, class_m);
  std::vector<std::vector<double>> rows(2, std::vector<double>(cb.size(), 0.0));
  for (std::size_t r = 0; r < cb.size(); ++r) {
    if (cb[r] >= cm[r])
      rows[0][r] = cb[r];
    else
      rows[1][r] = -cm[r];
  }
  return complete_lowpass(group, rows, ErrorCode::BoundViolation,
                          "class means too large, signals must be bounded by 1/2");
}

Signal normalize_by_max(const Signal& f) {
  double mx = 0.0;
  for (const auto& v : f.values()) mx = std::max(mx, std::abs(v));
  if (mx == 0.0) return f;
  Signal out = f;
  out *= 1.0 / mx;
  return out;
}

Kernel distance_class_kernel(const std::vector<Signal>& representatives) {
  const auto group = common_group(representatives);
  const double scale = 1.0 / std::sqrt(double(representatives.size()));
  std::vector<std::vector<double>> rows;
  for (const auto& d : representatives) {
    auto m = magnitudes(d);
    for (auto& v : m) v *= scale;
    rows.push_back(std::move(m));
  }
  return complete_lowpass(group, rows, ErrorCode::NumericalIntegrity, "distance kernel");
}

Kernel random_orbit_kernel(const std::vector<Signal>& generators) {
  const auto group = common_group(generators);
  std::vector<std::vector<double>> rows;
  for (const auto& f : generators) rows.push_back(magnitudes(f));
  return complete_lowpass(group, rows, ErrorCode::BoundViolation, "orbit kernel");
}

Recipe parse_recipe(const std::string& tag) {
  if (tag == "affine_twoclass") return Recipe::AffineTwoClass;
  if (tag == "distance_classes") return Recipe::DistanceClasses;
  if (tag == "random_orbits") return Recipe::RandomOrbits;
  fail(ErrorCode::InvalidParameter, "unknown recipe '" + tag + "'");
}

std::string recipe_tag(Recipe recipe) {
  switch (recipe) {
    case Recipe::AffineTwoClass:
      return "affine_twoclass";
    case Recipe::DistanceClasses:
      return "distance_classes";
    case Recipe::RandomOrbits:
      return "random_orbits";
  }
  return "";
}

Kernel learn_kernel(Recipe recipe, const std::vector<Signal>& signals, const std::vector<std::string>& labels) {
  if (signals.size() != labels.size()) fail(ErrorCode::InvalidParameter, "signals and labels differ in length");
  const auto group = common_group(signals);
  std::vector<std::string> order;
  std::vector<std::vector<Signal>> by_class;
  for (std::size_t i = 0; i < signals.size(); ++i) {
    auto it = std::find(order.begin(), order.end(), labels[i]);
    if (it == order.end()) {
      order.push_back(labels[i]);
      by_class.emplace_back();
      it = order.end() - 1;
    }
    by_class[std::size_t(it - order.begin())].push_back(signals[i]);
  }
  switch (recipe) {
    case Recipe::AffineTwoClass:
      if (order.size() != 2)
        fail(ErrorCode::InvalidParameter, "affine_twoclass needs exactly two labels, got " + std::to_string(order.size()));
      return affine_twoclass_kernel(group, by_class[0], by_class[1]);
    case Recipe::DistanceClasses: {
      std::vector<Signal> reps;
      for (const auto& c : by_class) reps.push_back(normalize_by_max(c.front()));
      return distance_class_kernel(reps);
    }
    case Recipe::RandomOrbits: {
      std::vector<Signal> reps;
      for (const auto& c : by_class) reps.push_back(c.front());
      return random_orbit_kernel(reps);
    }
  }
  fail(ErrorCode::InvalidParameter, "unknown recipe");
}

}  // namespace gscat
