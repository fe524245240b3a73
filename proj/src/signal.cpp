#include "gscat/signal.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "gscat/error.hpp"

namespace gscat {

namespace {

void check_finite(std::span<const cd> values) {
  for (std::size_t x = 0; x < values.size(); ++x) {
    if (!std::isfinite(values[x].real()) || !std::isfinite(values[x].imag())) {
      fail(ErrorCode::Domain, "signal value at element " + std::to_string(x) + " is not finite");
    }
  }
}

void check_element(const FiniteGroup& g, std::uint32_t h) {
  if (h >= g.order()) {
    fail(ErrorCode::Domain, "element index " + std::to_string(h) + " out of range for " + g.descriptor());
  }
}

bool all_real(const std::vector<cd>& v) {
  for (const auto& z : v) {
    if (z.imag() != 0.0) return false;
  }
  return true;
}

}  // namespace

Signal::Signal(GroupPtr group) : group_(std::move(group)) {
  if (!group_) fail(ErrorCode::Domain, "signal needs a group");
  values_.assign(group_->order(), cd(0.0, 0.0));
}

Signal::Signal(GroupPtr group, std::vector<cd> values) : group_(std::move(group)), values_(std::move(values)) {
  if (!group_) fail(ErrorCode::Domain, "signal needs a group");
  if (values_.size() != group_->order()) {
    fail(ErrorCode::Domain, "signal has " + std::to_string(values_.size()) + " values but " + group_->descriptor() +
                                " has order " + std::to_string(group_->order()));
  }
  check_finite(values_);
}

Signal Signal::from_real(GroupPtr group, std::span<const double> values) {
  std::vector<cd> v(values.begin(), values.end());
  return Signal(std::move(group), std::move(v));
}

Signal Signal::constant(GroupPtr group, cd value) {
  const auto n = group->order();
  return Signal(std::move(group), std::vector<cd>(n, value));
}

Signal Signal::delta(GroupPtr group, std::uint32_t x) {
  check_element(*group, x);
  Signal out(group);
  out[x] = double(group->order());
  return out;
}

bool Signal::is_real(double tol) const {
  for (const auto& z : values_) {
    if (std::abs(z.imag()) > tol) return false;
  }
  return true;
}

std::vector<double> Signal::real_part() const {
  std::vector<double> out(values_.size());
  for (std::size_t x = 0; x < values_.size(); ++x) out[x] = values_[x].real();
  return out;
}

Signal& Signal::operator+=(const Signal& other) {
  require_same_group(*this, other);
  for (std::size_t x = 0; x < values_.size(); ++x) values_[x] += other.values_[x];
  return *this;
}

Signal& Signal::operator-=(const Signal& other) {
  require_same_group(*this, other);
  for (std::size_t x = 0; x < values_.size(); ++x) values_[x] -= other.values_[x];
  return *this;
}

Signal& Signal::operator*=(cd scale) {
  for (auto& z : values_) z *= scale;
  return *this;
}

Signal operator+(Signal a, const Signal& b) { return a += b; }
Signal operator-(Signal a, const Signal& b) { return a -= b; }
Signal operator*(cd scale, Signal a) { return a *= scale; }

void require_same_group(const Signal& f, const Signal& g) {
  if (!f.group_ptr() || !g.group_ptr() || !same_group(f.group(), g.group())) {
    fail(ErrorCode::Domain, "signals live on different groups");
  }
}

cd inner(const Signal& f, const Signal& g) {
  require_same_group(f, g);
  double re = 0.0, im = 0.0;
  for (std::size_t x = 0; x < f.size(); ++x) {
    const cd a = f[x], b = g[x];
    re += a.real() * b.real() + a.imag() * b.imag();
    im += a.imag() * b.real() - a.real() * b.imag();
  }
  const double n = double(f.size());
  return {re / n, im / n};
}

double norm_squared(const Signal& f) {
  double s = 0.0;
  for (const auto& z : f.values()) s += z.real() * z.real() + z.imag() * z.imag();
  return s / double(f.size());
}

double norm(const Signal& f) { return std::sqrt(norm_squared(f)); }

double distance_squared(const Signal& f, const Signal& g) {
  require_same_group(f, g);
  double s = 0.0;
  for (std::size_t x = 0; x < f.size(); ++x) s += std::norm(f[x] - g[x]);
  return s / double(f.size());
}

double max_abs_difference(const Signal& f, const Signal& g) {
  require_same_group(f, g);
  double m = 0.0;
  for (std::size_t x = 0; x < f.size(); ++x) m = std::max(m, std::abs(f[x] - g[x]));
  return m;
}

Signal convolve(const Signal& f, const Signal& g) {
  require_same_group(f, g);
  const auto& G = f.group();
  const std::size_t n = G.order();
  const double dn = double(n);
  std::vector<double> re(n, 0.0), im(n, 0.0);
  const bool real = all_real(f.values()) && all_real(g.values());
  auto nonzeros = [](const Signal& s) {
    std::size_t c = 0;
    for (const auto& z : s.values()) c += (z != cd(0.0, 0.0));
    return c;
  };
  if (nonzeros(g) < nonzeros(f)) {
    // Sparse right factor: (f*g)(x) = (1/|G|) sum_z f(x z^-1) g(z).
    for (std::uint32_t z = 0; z < n; ++z) {
      const double cr = g[z].real() / dn, ci = g[z].imag() / dn;
      if (cr == 0.0 && ci == 0.0) continue;
      const auto zi = G.inv(z);
      for (std::uint32_t x = 0; x < n; ++x) {
        const cd a = f[G.mul(x, zi)];
        re[x] += cr * a.real() - ci * a.imag();
        im[x] += cr * a.imag() + ci * a.real();
      }
    }
  } else {
    std::vector<double> gre(n), gim(n);
    for (std::size_t x = 0; x < n; ++x) {
      gre[x] = g[x].real();
      gim[x] = g[x].imag();
    }
    for (std::uint32_t y = 0; y < n; ++y) {
      const double ar = f[y].real() / dn, ai = f[y].imag() / dn;
      if (ar == 0.0 && ai == 0.0) continue;
      // y^-1 x for every x
      const auto row = G.mul_row(G.inv(y));
      if (real) {
        for (std::size_t x = 0; x < n; ++x) re[x] += ar * gre[row[x]];
      } else {
        for (std::size_t x = 0; x < n; ++x) {
          const double br = gre[row[x]], bi = gim[row[x]];
          re[x] += ar * br - ai * bi;
          im[x] += ar * bi + ai * br;
        }
      }
    }
  }
  std::vector<cd> out(n);
  for (std::size_t x = 0; x < n; ++x) out[x] = {re[x], im[x]};
  return Signal(f.group_ptr(), std::move(out));
}

Signal translate_left(const Signal& f, std::uint32_t h) {
  const auto& G = f.group();
  check_element(G, h);
  const auto row = G.mul_row(G.inv(h));
  std::vector<cd> out(f.size());
  for (std::size_t x = 0; x < f.size(); ++x) out[x] = f[row[x]];
  return Signal(f.group_ptr(), std::move(out));
}

Signal translate_right(const Signal& f, std::uint32_t h) {
  const auto& G = f.group();
  check_element(G, h);
  std::vector<cd> out(f.size());
  for (std::uint32_t x = 0; x < f.size(); ++x) out[x] = f[G.mul(x, h)];
  return Signal(f.group_ptr(), std::move(out));
}

Signal involute(const Signal& f) {
  const auto& G = f.group();
  std::vector<cd> out(f.size());
  for (std::uint32_t x = 0; x < f.size(); ++x) out[x] = std::conj(f[G.inv(x)]);
  return Signal(f.group_ptr(), std::move(out));
}

Signal modulus(const Signal& f) {
  std::vector<cd> out(f.size());
  for (std::size_t x = 0; x < f.size(); ++x) out[x] = std::abs(f[x]);
  return Signal(f.group_ptr(), std::move(out));
}

std::vector<cd> class_values_from_coefficients(const FiniteGroup& g, std::span<const cd> gamma) {
  const std::size_t k = g.num_classes();
  if (gamma.size() != k) {
    fail(ErrorCode::Domain, "coefficient row has length " + std::to_string(gamma.size()) + ", expected " +
                                std::to_string(k));
  }
  const auto& t = g.table();
  std::vector<cd> values(k, cd(0.0, 0.0));
  for (std::size_t r = 0; r < k; ++r) {
    if (gamma[r] == cd(0.0, 0.0)) continue;
    const cd w = double(t.degrees[r]) * gamma[r];
    for (std::size_t c = 0; c < k; ++c) values[c] += w * t(r, c);
  }
  return values;
}

Signal class_function_from_coefficients(const GroupPtr& group, std::span<const cd> gamma) {
  const auto values = class_values_from_coefficients(*group, gamma);
  std::vector<cd> out(group->order());
  for (std::uint32_t x = 0; x < out.size(); ++x) out[x] = values[group->class_of(x)];
  return Signal(group, std::move(out));
}

Signal isotypic_project(const Signal& f, std::size_t r) {
  if (r >= f.group().num_classes()) {
    fail(ErrorCode::Domain, "irreducible index " + std::to_string(r) + " out of range");
  }
  return ClassConvolver(f).project(r);
}

std::vector<double> spectral_energies(const Signal& f) {
  const ClassConvolver conv(f);
  const std::size_t k = f.group().num_classes();
  std::vector<double> out(k);
  for (std::size_t r = 0; r < k; ++r) out[r] = norm_squared(conv.project(r));
  return out;
}

ClassConvolver::ClassConvolver(const Signal& f) : group_(f.group_ptr()) {
  const auto& G = *group_;
  const std::size_t n = G.order();
  const std::size_t k = G.num_classes();
  abelian_ = G.is_abelian();
  real_ = all_real(f.values());
  if (abelian_) {
    // fhat(r) = (1/|G|) sum_x f(x) conj(chi^r(x)); classes are singletons here.
    fourier_.assign(k, cd(0.0, 0.0));
    const auto& t = G.table();
    std::vector<double> fre(n), fim(n);
    for (std::size_t x = 0; x < n; ++x) {
      fre[x] = f[x].real();
      fim[x] = f[x].imag();
    }
    for (std::size_t r = 0; r < k; ++r) {
      const auto row = t.row(r);
      double re = 0.0, im = 0.0;
      for (std::uint32_t x = 0; x < n; ++x) {
        const cd c = row[G.class_of(x)];
        re += fre[x] * c.real() + fim[x] * c.imag();
        im += fim[x] * c.real() - fre[x] * c.imag();
      }
      fourier_[r] = {re / double(n), im / double(n)};
    }
    return;
  }
  std::vector<double> fre(n), fim(n);
  for (std::size_t x = 0; x < n; ++x) {
    fre[x] = f[x].real();
    fim[x] = f[x].imag();
  }
  sums_re_.assign(k * n, 0.0);
  if (!real_) sums_im_.assign(k * n, 0.0);
  for (std::uint32_t y = 0; y < n; ++y) {
    const std::size_t c = G.class_of(y);
    const auto row = G.mul_row(G.inv(y));
    double* are = sums_re_.data() + c * n;
    for (std::size_t x = 0; x < n; ++x) are[x] += fre[row[x]];
    if (!real_) {
      double* aim = sums_im_.data() + c * n;
      for (std::size_t x = 0; x < n; ++x) aim[x] += fim[row[x]];
    }
  }
}

void ClassConvolver::apply_into(std::span<const cd> gamma, std::vector<cd>& out) const {
  const auto& G = *group_;
  const std::size_t n = G.order();
  const std::size_t k = G.num_classes();
  if (gamma.size() != k) {
    fail(ErrorCode::Domain, "coefficient row has length " + std::to_string(gamma.size()) + ", expected " +
                                std::to_string(k));
  }
  std::vector<double> re(n, 0.0), im(n, 0.0);
  if (abelian_) {
    const auto& t = G.table();
    for (std::size_t r = 0; r < k; ++r) {
      const cd w = gamma[r] * fourier_[r];
      if (w == cd(0.0, 0.0)) continue;
      const double wr = w.real(), wi = w.imag();
      const auto row = t.row(r);
      for (std::uint32_t x = 0; x < n; ++x) {
        const cd c = row[G.class_of(x)];
        re[x] += wr * c.real() - wi * c.imag();
        im[x] += wr * c.imag() + wi * c.real();
      }
    }
  } else {
    const auto psi = class_values_from_coefficients(G, gamma);
    const double scale = 1.0 / double(n);
    for (std::size_t c = 0; c < k; ++c) {
      const double wr = psi[c].real() * scale, wi = psi[c].imag() * scale;
      if (wr == 0.0 && wi == 0.0) continue;
      const double* are = sums_re_.data() + c * n;
      if (real_) {
        for (std::size_t x = 0; x < n; ++x) {
          re[x] += wr * are[x];
          im[x] += wi * are[x];
        }
      } else {
        const double* aim = sums_im_.data() + c * n;
        for (std::size_t x = 0; x < n; ++x) {
          re[x] += wr * are[x] - wi * aim[x];
          im[x] += wr * aim[x] + wi * are[x];
        }
      }
    }
  }
  out.resize(n);
  for (std::size_t x = 0; x < n; ++x) out[x] = {re[x], im[x]};
}

Signal ClassConvolver::apply(std::span<const cd> gamma) const {
  std::vector<cd> out;
  apply_into(gamma, out);
  return Signal(group_, std::move(out));
}

Signal ClassConvolver::project(std::size_t r) const {
  const std::size_t k = group_->num_classes();
  if (r >= k) fail(ErrorCode::Domain, "irreducible index " + std::to_string(r) + " out of range");
  std::vector<cd> gamma(k, cd(0.0, 0.0));
  gamma[r] = 1.0;
  return apply(gamma);
}

Signal random_signal(const GroupPtr& group, std::mt19937_64& rng, bool real_only) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<cd> v(group->order());
  for (auto& z : v) {
    const double re = normal(rng);
    const double im = real_only ? 0.0 : normal(rng);
    z = {re, im};
  }
  return Signal(group, std::move(v));
}

void write_signal_csv(std::ostream& os, const Signal& f) {
  os << "index,re,im\n";
  char buf[96];
  for (std::size_t x = 0; x < f.size(); ++x) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", x, f[x].real(), f[x].imag());
    os << buf;
  }
}

Signal read_signal_csv(std::istream& is, const GroupPtr& group) {
  std::vector<cd> values(group->order(), cd(0.0, 0.0));
  std::vector<bool> seen(values.size(), false);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    if (line_no == 1 && line.rfind("index", 0) == 0) continue;
    std::istringstream ls(line);
    std::string a, b, c;
    if (!std::getline(ls, a, ',') || !std::getline(ls, b, ',')) {
      fail(ErrorCode::Format, "signal CSV line " + std::to_string(line_no) + " needs index,re[,im]");
    }
    std::getline(ls, c, ',');
    std::size_t x = 0;
    double re = 0.0, im = 0.0;
    try {
      x = std::stoull(a);
      re = std::stod(b);
      im = c.empty() ? 0.0 : std::stod(c);
    } catch (const std::exception&) {
      fail(ErrorCode::Format, "signal CSV line " + std::to_string(line_no) + " is not numeric");
    }
    if (x >= values.size()) fail(ErrorCode::Domain, "signal CSV index " + std::to_string(x) + " out of range");
    values[x] = {re, im};
    seen[x] = true;
  }
  for (std::size_t x = 0; x < seen.size(); ++x) {
    if (!seen[x]) fail(ErrorCode::Format, "signal CSV is missing element " + std::to_string(x));
  }
  return Signal(group, std::move(values));
}

void write_signal_binary(std::ostream& os, const Signal& f) {
  const std::uint64_t n = f.size();
  unsigned char header[8];
  for (int i = 0; i < 8; ++i) header[i] = static_cast<unsigned char>(n >> (8 * i));
  os.write(reinterpret_cast<const char*>(header), 8);
  for (const auto& z : f.values()) {
    double pair[2] = {z.real(), z.imag()};
    os.write(reinterpret_cast<const char*>(pair), sizeof pair);
  }
}

Signal read_signal_binary(std::istream& is, const GroupPtr& group) {
  unsigned char header[8];
  if (!is.read(reinterpret_cast<char*>(header), 8)) fail(ErrorCode::Format, "signal record truncated at byte 0");
  std::uint64_t n = 0;
  for (int i = 0; i < 8; ++i) n |= std::uint64_t(header[i]) << (8 * i);
  if (n != group->order()) {
    fail(ErrorCode::Domain, "signal record length " + std::to_string(n) + " does not match |G| = " +
                                std::to_string(group->order()));
  }
  std::vector<cd> values(n);
  for (std::uint64_t x = 0; x < n; ++x) {
    double pair[2];
    if (!is.read(reinterpret_cast<char*>(pair), sizeof pair)) {
      fail(ErrorCode::Format, "signal record truncated at byte " + std::to_string(8 + 16 * x));
    }
    values[x] = {pair[0], pair[1]};
  }
  return Signal(group, std::move(values));
}

namespace {
bool has_bin_extension(const std::string& path) {
  return path.size() >= 4 && path.compare(path.size() - 4, 4, ".bin") == 0;
}
}  // namespace

Signal load_signal_file(const std::string& path, const GroupPtr& group) {
  const bool binary = has_bin_extension(path);
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) fail(ErrorCode::FileNotFound, "cannot open signal file '" + path + "'");
  return binary ? read_signal_binary(in, group) : read_signal_csv(in, group);
}

void save_signal_file(const std::string& path, const Signal& f) {
  const bool binary = has_bin_extension(path);
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) fail(ErrorCode::FileNotFound, "cannot write signal file '" + path + "'");
  if (binary) write_signal_binary(out, f);
  else write_signal_csv(out, f);
}

}  // namespace gscat
