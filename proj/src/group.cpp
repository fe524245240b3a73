#include "gscat/group.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "gscat/error.hpp"

namespace gscat {

namespace {

cd root_of_unity(long long num, long long den) {
  // exp(2 pi i num / den) with the angle reduced first so equal residues give equal bits.
  long long r = num % den;
  if (r < 0) r += den;
  const double angle = 2.0 * std::numbers::pi * double(r) / double(den);
  return {std::cos(angle), std::sin(angle)};
}

void check_capacity(std::size_t order, const GroupLimits& limits, const std::string& what) {
  if (order > limits.max_order) {
    fail(ErrorCode::Capacity, what + " has order " + std::to_string(order) + ", above the configured maximum " +
                                  std::to_string(limits.max_order));
  }
}

// Descending lexicographic comparison of character rows, degree first.
bool character_row_before(int deg_a, std::span<const cd> a, int deg_b, std::span<const cd> b) {
  if (deg_a != deg_b) return deg_a < deg_b;
  for (std::size_t c = 0; c < a.size(); ++c) {
    if (std::abs(a[c].real() - b[c].real()) > kTolerance) return a[c].real() > b[c].real();
    if (std::abs(a[c].imag() - b[c].imag()) > kTolerance) return a[c].imag() > b[c].imag();
  }
  return false;
}

std::string quote_csv(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

std::string perm_label(std::span<const int> p) {
  std::string s = "(";
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(p[i] + 1);
  }
  return s + ")";
}

std::string partition_label(const Partition& p) {
  std::string s = "(";
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(p[i]);
  }
  return s + ")";
}

std::uint64_t pow_mod(std::uint64_t base, std::uint64_t exp, std::uint64_t mod) {
  std::uint64_t result = 1 % mod;
  base %= mod;
  while (exp) {
    if (exp & 1) result = result * base % mod;
    base = base * base % mod;
    exp >>= 1;
  }
  return result;
}

// Discrete logarithm table: log[a] = j with g^j = a, for a in 1..p-1.
std::vector<std::uint32_t> discrete_logs(std::uint32_t p, std::uint32_t g) {
  std::vector<std::uint32_t> log(p, 0);
  std::uint64_t value = 1;
  for (std::uint32_t j = 0; j + 1 < p; ++j) {
    log[value] = j;
    value = value * g % p;
  }
  return log;
}

using Memo = std::map<std::pair<Partition, Partition>, std::int64_t>;

std::int64_t murnaghan_nakayama(const Partition& lambda, const Partition& mu, Memo& memo) {
  if (mu.empty()) return lambda.empty() ? 1 : 0;
  auto key = std::make_pair(lambda, mu);
  if (auto it = memo.find(key); it != memo.end()) return it->second;

  const int hook = mu.front();
  const Partition rest(mu.begin() + 1, mu.end());
  const int len = int(lambda.size());
  std::vector<int> beta(len);
  for (int i = 0; i < len; ++i) beta[i] = lambda[i] + (len - 1 - i);

  std::int64_t total = 0;
  for (int i = 0; i < len; ++i) {
    const int moved = beta[i] - hook;
    if (moved < 0 || std::find(beta.begin(), beta.end(), moved) != beta.end()) continue;
    int crossed = 0;
    for (int b : beta) {
      if (b > moved && b < beta[i]) ++crossed;
    }
    std::vector<int> next = beta;
    next[i] = moved;
    std::sort(next.begin(), next.end(), std::greater<>());
    Partition reduced;
    for (int j = 0; j < len; ++j) {
      const int part = next[j] - (len - 1 - j);
      if (part > 0) reduced.push_back(part);
    }
    const std::int64_t sign = (crossed % 2) ? -1 : 1;
    total += sign * murnaghan_nakayama(reduced, rest, memo);
  }
  memo.emplace(std::move(key), total);
  return total;
}

}  // namespace

FiniteGroup::FiniteGroup(Parts parts) : parts_(std::move(parts)) {
  const std::size_t n = parts_.order;
  if (n == 0) fail(ErrorCode::InvalidOrder, "group order must be positive");
  if (parts_.mul.size() != n * n || parts_.inv.size() != n || parts_.class_of.size() != n) {
    fail(ErrorCode::Domain, "group tables do not match order " + std::to_string(n));
  }
  if (parts_.identity >= n) fail(ErrorCode::Domain, "identity index out of range");
  std::size_t k = 0;
  for (auto c : parts_.class_of) k = std::max<std::size_t>(k, c + 1);
  auto& t = parts_.table;
  if (t.k != k || t.degrees.size() != k || t.chi.size() != k * k) {
    fail(ErrorCode::Domain, "character table shape does not match " + std::to_string(k) + " classes");
  }
  if (parts_.element_labels.size() != n) {
    parts_.element_labels.resize(n);
    for (std::size_t x = 0; x < n; ++x) parts_.element_labels[x] = std::to_string(x);
  }
  if (parts_.class_labels.size() != k) {
    parts_.class_labels.resize(k);
    for (std::size_t c = 0; c < k; ++c) parts_.class_labels[c] = "C" + std::to_string(c + 1);
  }
  if (t.labels.size() != k) {
    t.labels.resize(k);
    for (std::size_t r = 0; r < k; ++r) t.labels[r] = "chi" + std::to_string(r + 1);
  }

  class_sizes_.assign(k, 0);
  class_members_.assign(k, {});
  for (std::uint32_t x = 0; x < n; ++x) {
    ++class_sizes_[parts_.class_of[x]];
    class_members_[parts_.class_of[x]].push_back(x);
  }
  class_reps_.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    if (class_members_[c].empty()) fail(ErrorCode::Domain, "empty conjugacy class " + std::to_string(c));
    class_reps_[c] = class_members_[c].front();
  }
  for (std::size_t r = 0; r < k; ++r) {
    bool trivial = true;
    for (std::size_t c = 0; c < k && trivial; ++c) trivial = std::abs(t(r, c) - cd(1.0, 0.0)) <= kTolerance;
    if (trivial) {
      trivial_ = r;
      break;
    }
  }
}

bool same_group(const FiniteGroup& a, const FiniteGroup& b) {
  return &a == &b || (a.order() == b.order() && a.descriptor() == b.descriptor());
}

GroupPtr finalize_group(FiniteGroup::Parts parts) {
  const std::size_t n = parts.order;
  std::size_t k = 0;
  for (auto c : parts.class_of) k = std::max<std::size_t>(k, c + 1);
  std::vector<std::size_t> size(k, 0);
  std::vector<std::uint32_t> first(k, std::uint32_t(n));
  for (std::uint32_t x = 0; x < n; ++x) {
    const auto c = parts.class_of[x];
    ++size[c];
    first[c] = std::min(first[c], x);
  }
  const auto id_class = parts.class_of[parts.identity];
  std::vector<std::uint32_t> order(k);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    if ((a == id_class) != (b == id_class)) return a == id_class;
    if (size[a] != size[b]) return size[a] < size[b];
    return first[a] < first[b];
  });
  std::vector<std::uint32_t> new_index(k);
  for (std::size_t i = 0; i < k; ++i) new_index[order[i]] = std::uint32_t(i);

  for (auto& c : parts.class_of) c = new_index[c];
  std::vector<std::string> class_labels(k);
  if (parts.class_labels.size() == k) {
    for (std::size_t i = 0; i < k; ++i) class_labels[i] = parts.class_labels[order[i]];
    parts.class_labels = std::move(class_labels);
  }

  auto& t = parts.table;
  std::vector<cd> permuted(k * k);
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t i = 0; i < k; ++i) permuted[r * k + i] = t.chi[r * k + order[i]];
  }
  std::vector<std::size_t> rows(k);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  std::stable_sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) {
    return character_row_before(t.degrees[a], {permuted.data() + a * k, k}, t.degrees[b],
                                {permuted.data() + b * k, k});
  });
  CharacterTable sorted;
  sorted.k = k;
  sorted.degrees.resize(k);
  sorted.chi.resize(k * k);
  sorted.labels.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    const auto r = rows[i];
    sorted.degrees[i] = t.degrees[r];
    sorted.labels[i] = t.labels.size() == k ? t.labels[r] : "chi" + std::to_string(r + 1);
    std::copy_n(permuted.data() + r * k, k, sorted.chi.data() + i * k);
  }
  parts.table = std::move(sorted);
  return std::make_shared<const FiniteGroup>(std::move(parts));
}

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d) {
    if (n % d == 0) return false;
  }
  return true;
}

std::uint32_t primitive_root(std::uint32_t p) {
  if (!is_prime(p)) fail(ErrorCode::InvalidParameter, std::to_string(p) + " is not prime");
  if (p == 2) return 1;
  std::vector<std::uint64_t> factors;
  std::uint64_t m = p - 1;
  for (std::uint64_t d = 2; d * d <= m; ++d) {
    if (m % d == 0) {
      factors.push_back(d);
      while (m % d == 0) m /= d;
    }
  }
  if (m > 1) factors.push_back(m);
  for (std::uint32_t g = 2; g < p; ++g) {
    bool generator = true;
    for (auto q : factors) {
      if (pow_mod(g, (p - 1) / q, p) == 1) {
        generator = false;
        break;
      }
    }
    if (generator) return g;
  }
  fail(ErrorCode::NumericalIntegrity, "no primitive root found for " + std::to_string(p));
}

GroupPtr build_cyclic(std::size_t n, const GroupLimits& limits) {
  if (n == 0) fail(ErrorCode::InvalidOrder, "cyclic group order must be at least 1");
  check_capacity(n, limits, "Z/" + std::to_string(n));
  FiniteGroup::Parts parts;
  parts.descriptor = "cyclic(" + std::to_string(n) + ")";
  parts.family = GroupFamily::Cyclic;
  parts.order = n;
  parts.mul.resize(n * n);
  parts.inv.resize(n);
  parts.class_of.resize(n);
  parts.element_labels.resize(n);
  parts.class_labels.resize(n);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = 0; y < n; ++y) parts.mul[x * n + y] = std::uint32_t((x + y) % n);
    parts.inv[x] = std::uint32_t((n - x) % n);
    parts.class_of[x] = std::uint32_t(x);
    parts.element_labels[x] = std::to_string(x);
    parts.class_labels[x] = std::to_string(x);
  }
  auto& t = parts.table;
  t.k = n;
  t.degrees.assign(n, 1);
  t.chi.resize(n * n);
  t.labels.resize(n);
  for (std::size_t a = 0; a < n; ++a) {
    t.labels[a] = "a=" + std::to_string(a);
    for (std::size_t x = 0; x < n; ++x) t.chi[a * n + x] = root_of_unity((long long)(a * x), (long long)n);
  }
  return finalize_group(std::move(parts));
}

GroupPtr build_units(std::uint32_t p, const GroupLimits& limits) {
  if (!is_prime(p)) fail(ErrorCode::InvalidParameter, std::to_string(p) + " is not prime");
  const std::size_t n = p - 1;
  check_capacity(n, limits, "F_" + std::to_string(p) + "^x");
  const auto g = primitive_root(p);
  const auto log = discrete_logs(p, g);
  FiniteGroup::Parts parts;
  parts.descriptor = "units(" + std::to_string(p) + ")";
  parts.family = GroupFamily::Units;
  parts.order = n;
  parts.mul.resize(n * n);
  parts.inv.resize(n);
  parts.class_of.resize(n);
  parts.element_labels.resize(n);
  parts.class_labels.resize(n);
  for (std::size_t x = 0; x < n; ++x) {
    const std::uint64_t rx = x + 1;
    for (std::size_t y = 0; y < n; ++y) parts.mul[x * n + y] = std::uint32_t(rx * (y + 1) % p - 1);
    parts.inv[x] = std::uint32_t(pow_mod(rx, p - 2, p) - 1);
    parts.class_of[x] = std::uint32_t(x);
    parts.element_labels[x] = std::to_string(rx);
    parts.class_labels[x] = std::to_string(rx);
  }
  auto& t = parts.table;
  t.k = n;
  t.degrees.assign(n, 1);
  t.chi.resize(n * n);
  t.labels.resize(n);
  for (std::size_t a = 0; a < n; ++a) {
    t.labels[a] = "k=" + std::to_string(a);
    for (std::size_t x = 0; x < n; ++x) t.chi[a * n + x] = root_of_unity((long long)(a * log[x + 1]), (long long)n);
  }
  return finalize_group(std::move(parts));
}

GroupPtr build_product(const GroupPtr& g1, const GroupPtr& g2, const GroupLimits& limits) {
  if (!g1 || !g2) fail(ErrorCode::Domain, "product factors must be built groups");
  const std::size_t n1 = g1->order(), n2 = g2->order();
  const std::size_t n = n1 * n2;
  check_capacity(n, limits, "product(" + g1->descriptor() + "," + g2->descriptor() + ")");
  const std::size_t k1 = g1->num_classes(), k2 = g2->num_classes();
  FiniteGroup::Parts parts;
  parts.descriptor = "product(" + g1->descriptor() + "," + g2->descriptor() + ")";
  parts.family = GroupFamily::Product;
  parts.order = n;
  parts.identity = g1->identity() * std::uint32_t(n2) + g2->identity();
  parts.mul.resize(n * n);
  parts.inv.resize(n);
  parts.class_of.resize(n);
  parts.element_labels.resize(n);
  for (std::uint32_t a1 = 0; a1 < n1; ++a1) {
    for (std::uint32_t a2 = 0; a2 < n2; ++a2) {
      const std::size_t x = std::size_t(a1) * n2 + a2;
      parts.inv[x] = g1->inv(a1) * std::uint32_t(n2) + g2->inv(a2);
      parts.class_of[x] = g1->class_of(a1) * std::uint32_t(k2) + g2->class_of(a2);
      parts.element_labels[x] = "(" + g1->element_label(a1) + "," + g2->element_label(a2) + ")";
      auto* row = parts.mul.data() + x * n;
      for (std::uint32_t b1 = 0; b1 < n1; ++b1) {
        const std::uint32_t base = g1->mul(a1, b1) * std::uint32_t(n2);
        const auto r2 = g2->mul_row(a2);
        for (std::uint32_t b2 = 0; b2 < n2; ++b2) row[std::size_t(b1) * n2 + b2] = base + r2[b2];
      }
    }
  }
  parts.class_labels.resize(k1 * k2);
  for (std::size_t c1 = 0; c1 < k1; ++c1) {
    for (std::size_t c2 = 0; c2 < k2; ++c2) {
      parts.class_labels[c1 * k2 + c2] =
          "(" + g1->element_label(g1->class_rep(c1)) + "," + g2->element_label(g2->class_rep(c2)) + ")";
    }
  }
  const std::size_t k = k1 * k2;
  auto& t = parts.table;
  t.k = k;
  t.degrees.resize(k);
  t.chi.resize(k * k);
  t.labels.resize(k);
  const auto& t1 = g1->table();
  const auto& t2 = g2->table();
  for (std::size_t r1 = 0; r1 < k1; ++r1) {
    for (std::size_t r2 = 0; r2 < k2; ++r2) {
      const std::size_t r = r1 * k2 + r2;
      t.degrees[r] = t1.degrees[r1] * t2.degrees[r2];
      t.labels[r] = t1.labels[r1] + " x " + t2.labels[r2];
      for (std::size_t c1 = 0; c1 < k1; ++c1) {
        for (std::size_t c2 = 0; c2 < k2; ++c2) t.chi[r * k + c1 * k2 + c2] = t1(r1, c1) * t2(r2, c2);
      }
    }
  }
  return finalize_group(std::move(parts));
}

GroupPtr build_affine(std::uint32_t p, const GroupLimits& limits) {
  if (!is_prime(p)) fail(ErrorCode::InvalidParameter, std::to_string(p) + " is not prime");
  const std::size_t n = std::size_t(p) * (p - 1);
  check_capacity(n, limits, "Aff(F_" + std::to_string(p) + ")");
  const auto g = primitive_root(p);
  const auto log = discrete_logs(p, g);
  FiniteGroup::Parts parts;
  parts.descriptor = "affine(" + std::to_string(p) + ")";
  parts.family = GroupFamily::Affine;
  parts.order = n;
  parts.identity = affine_index(p, 1, 0);
  parts.mul.resize(n * n);
  parts.inv.resize(n);
  parts.class_of.resize(n);
  parts.element_labels.resize(n);
  std::vector<std::uint64_t> inverse_mod(p, 0);
  for (std::uint64_t a = 1; a < p; ++a) inverse_mod[a] = pow_mod(a, p - 2, p);
  for (std::uint32_t x = 0; x < n; ++x) {
    const auto [c, d] = affine_element(p, x);
    // [c,d][a,b] = [ca, cb + d]
    auto* row = parts.mul.data() + std::size_t(x) * n;
    for (std::uint32_t y = 0; y < n; ++y) {
      const auto [a, b] = affine_element(p, y);
      row[y] = affine_index(p, std::uint32_t(std::uint64_t(c) * a % p), std::uint32_t((std::uint64_t(c) * b + d) % p));
    }
    const std::uint64_t ci = inverse_mod[c];
    parts.inv[x] = affine_index(p, std::uint32_t(ci), std::uint32_t((p - ci * d % p) % p));
    parts.class_of[x] = c == 1 ? (d == 0 ? 0u : 1u) : c;
    parts.element_labels[x] = "(" + std::to_string(c) + "," + std::to_string(d) + ")";
  }
  const std::size_t k = p;
  parts.class_labels.resize(k);
  parts.class_labels[0] = "(1,0)";
  if (k > 1) parts.class_labels[1] = "(1,1)";
  for (std::uint32_t a = 2; a < p; ++a) parts.class_labels[a] = "(" + std::to_string(a) + ",0)";

  auto& t = parts.table;
  t.k = k;
  t.degrees.assign(k, 1);
  t.chi.assign(k * k, cd(0.0, 0.0));
  t.labels.resize(k);
  const long long m = p - 1;
  for (std::uint32_t lin = 0; lin + 1 < p; ++lin) {
    t.labels[lin] = "k=" + std::to_string(lin);
    t.chi[lin * k + 0] = 1.0;
    if (k > 1) t.chi[lin * k + 1] = 1.0;
    for (std::uint32_t a = 2; a < p; ++a) t.chi[lin * k + a] = root_of_unity((long long)lin * log[a], m);
  }
  const std::size_t big = k - 1;
  t.labels[big] = "degree " + std::to_string(p - 1);
  t.degrees[big] = int(p - 1);
  t.chi[big * k + 0] = double(p - 1);
  if (k > 1) t.chi[big * k + 1] = -1.0;
  return finalize_group(std::move(parts));
}

namespace perm {

std::size_t factorial(int n) {
  std::size_t f = 1;
  for (int i = 2; i <= n; ++i) f *= std::size_t(i);
  return f;
}

std::vector<int> unrank(std::size_t index, int n) {
  std::vector<int> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  std::vector<int> out;
  out.reserve(n);
  for (int i = n; i >= 1; --i) {
    const std::size_t f = factorial(i - 1);
    const std::size_t digit = index / f;
    index %= f;
    out.push_back(pool[digit]);
    pool.erase(pool.begin() + std::ptrdiff_t(digit));
  }
  return out;
}

std::size_t rank(std::span<const int> p) {
  const int n = int(p.size());
  std::size_t r = 0;
  for (int i = 0; i < n; ++i) {
    std::size_t smaller = 0;
    for (int j = i + 1; j < n; ++j) {
      if (p[j] < p[i]) ++smaller;
    }
    r += smaller * factorial(n - 1 - i);
  }
  return r;
}

std::vector<int> compose(std::span<const int> a, std::span<const int> b) {
  std::vector<int> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[std::size_t(b[i])];
  return out;
}

std::vector<int> inverse(std::span<const int> a) {
  std::vector<int> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[std::size_t(a[i])] = int(i);
  return out;
}

}  // namespace perm

std::vector<Partition> partitions(int n) {
  std::vector<Partition> out;
  Partition current;
  auto recurse = [&](auto&& self, int remaining, int max_part) -> void {
    if (remaining == 0) {
      out.push_back(current);
      return;
    }
    for (int part = std::min(remaining, max_part); part >= 1; --part) {
      current.push_back(part);
      self(self, remaining - part, part);
      current.pop_back();
    }
  };
  recurse(recurse, n, n);
  return out;
}

Partition cycle_type(std::span<const int> permutation) {
  const std::size_t n = permutation.size();
  std::vector<bool> seen(n, false);
  Partition type;
  for (std::size_t i = 0; i < n; ++i) {
    if (seen[i]) continue;
    int len = 0;
    for (std::size_t j = i; !seen[j]; j = std::size_t(permutation[j])) {
      seen[j] = true;
      ++len;
    }
    type.push_back(len);
  }
  std::sort(type.begin(), type.end(), std::greater<>());
  return type;
}

std::int64_t symmetric_character(const Partition& lambda, const Partition& mu) {
  Memo memo;
  Partition sorted_mu = mu;
  std::sort(sorted_mu.begin(), sorted_mu.end(), std::greater<>());
  return murnaghan_nakayama(lambda, sorted_mu, memo);
}

std::string partition_class_label(const Partition& p) {
  std::string s = "[";
  std::size_t i = 0;
  bool first = true;
  while (i < p.size()) {
    std::size_t j = i;
    while (j < p.size() && p[j] == p[i]) ++j;
    if (!first) s += ' ';
    s += std::to_string(p[i]) + "^" + std::to_string(j - i);
    first = false;
    i = j;
  }
  return s + "]";
}

GroupPtr build_symmetric(int n, const GroupLimits& limits) {
  if (n < 1 || n > 8) fail(ErrorCode::Capacity, "symmetric groups are supported for 1 <= n <= 8, got " + std::to_string(n));
  const std::size_t order = perm::factorial(n);
  check_capacity(order, limits, "S_" + std::to_string(n));

  std::vector<std::vector<int>> elements;
  elements.reserve(order);
  std::vector<int> current(n);
  std::iota(current.begin(), current.end(), 0);
  do {
    elements.push_back(current);
  } while (std::next_permutation(current.begin(), current.end()));

  // Base-n code -> lexicographic index.
  auto code_of = [n](std::span<const int> p) {
    std::size_t code = 0;
    for (int v : p) code = code * std::size_t(n) + std::size_t(v);
    return code;
  };
  std::size_t code_space = 1;
  for (int i = 0; i < n; ++i) code_space *= std::size_t(n);
  std::vector<std::uint32_t> index_of(code_space, 0);
  for (std::size_t x = 0; x < order; ++x) index_of[code_of(elements[x])] = std::uint32_t(x);

  FiniteGroup::Parts parts;
  parts.descriptor = "symmetric(" + std::to_string(n) + ")";
  parts.family = GroupFamily::Symmetric;
  parts.order = order;
  parts.identity = 0;
  parts.mul.resize(order * order);
  parts.inv.resize(order);
  parts.class_of.resize(order);
  parts.element_labels.resize(order);

  const auto classes = partitions(n);
  std::map<Partition, std::uint32_t> class_number;
  for (std::size_t c = 0; c < classes.size(); ++c) class_number[classes[c]] = std::uint32_t(c);

  std::vector<int> composed(n);
  for (std::size_t x = 0; x < order; ++x) {
    const auto& a = elements[x];
    auto* row = parts.mul.data() + x * order;
    for (std::size_t y = 0; y < order; ++y) {
      const auto& b = elements[y];
      std::size_t code = 0;
      for (int i = 0; i < n; ++i) code = code * std::size_t(n) + std::size_t(a[std::size_t(b[i])]);
      row[y] = index_of[code];
    }
    parts.inv[x] = index_of[code_of(perm::inverse(a))];
    parts.class_of[x] = class_number.at(cycle_type(a));
    parts.element_labels[x] = perm_label(a);
  }
  parts.class_labels.resize(classes.size());
  for (std::size_t c = 0; c < classes.size(); ++c) parts.class_labels[c] = partition_class_label(classes[c]);

  const std::size_t k = classes.size();
  auto& t = parts.table;
  t.k = k;
  t.degrees.resize(k);
  t.chi.resize(k * k);
  t.labels.resize(k);
  Memo memo;
  for (std::size_t r = 0; r < k; ++r) {
    t.labels[r] = partition_label(classes[r]);
    for (std::size_t c = 0; c < k; ++c) {
      t.chi[r * k + c] = double(murnaghan_nakayama(classes[r], classes[c], memo));
    }
  }
  const Partition ones(std::size_t(n), 1);
  const auto one_class = class_number.at(ones);
  for (std::size_t r = 0; r < k; ++r) t.degrees[r] = int(std::lround(t.chi[r * k + one_class].real()));
  return finalize_group(std::move(parts));
}

GroupPtr build_from_descriptor(std::string_view text, const GroupLimits& limits) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && std::isspace((unsigned char)s.front())) s.remove_prefix(1);
    while (!s.empty() && std::isspace((unsigned char)s.back())) s.remove_suffix(1);
    return s;
  };
  text = trim(text);
  const auto open = text.find('(');
  if (open == std::string_view::npos || text.back() != ')') {
    fail(ErrorCode::InvalidParameter, "malformed group descriptor '" + std::string(text) + "'");
  }
  const auto name = trim(text.substr(0, open));
  const auto args = trim(text.substr(open + 1, text.size() - open - 2));
  auto parse_uint = [&](std::string_view s) -> std::uint64_t {
    s = trim(s);
    if (s.empty() || s.find_first_not_of("0123456789") != std::string_view::npos) {
      fail(ErrorCode::InvalidParameter, "expected an integer in descriptor '" + std::string(text) + "'");
    }
    return std::stoull(std::string(s));
  };
  if (name == "cyclic") return build_cyclic(parse_uint(args), limits);
  if (name == "units") return build_units(std::uint32_t(parse_uint(args)), limits);
  if (name == "affine") return build_affine(std::uint32_t(parse_uint(args)), limits);
  if (name == "symmetric") return build_symmetric(int(parse_uint(args)), limits);
  if (name == "product") {
    int depth = 0;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (args[i] == '(') ++depth;
      if (args[i] == ')') --depth;
      if (args[i] == ',' && depth == 0) {
        auto left = build_from_descriptor(args.substr(0, i), limits);
        auto right = build_from_descriptor(args.substr(i + 1), limits);
        return build_product(left, right, limits);
      }
    }
    fail(ErrorCode::InvalidParameter, "product descriptor needs two factors: '" + std::string(text) + "'");
  }
  fail(ErrorCode::InvalidParameter, "unknown group family '" + std::string(name) + "'");
}

std::vector<std::uint32_t> compute_conjugacy_classes(std::size_t order, std::span<const std::uint32_t> mul,
                                                     std::span<const std::uint32_t> inv) {
  constexpr auto unset = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> class_of(order, unset);
  std::uint32_t next = 0;
  for (std::size_t x = 0; x < order; ++x) {
    if (class_of[x] != unset) continue;
    for (std::size_t y = 0; y < order; ++y) {
      const auto yx = mul[y * order + x];
      const auto conj = mul[std::size_t(yx) * order + inv[y]];
      class_of[conj] = next;
    }
    ++next;
  }
  return class_of;
}

GroupDiagnostics validate_group(const FiniteGroup& g, std::uint64_t seed) {
  GroupDiagnostics d;
  const auto n = std::uint32_t(g.order());
  const auto e = g.identity();
  auto note = [&d](bool& flag, const std::string& what) {
    if (flag && d.first_failure.empty()) d.first_failure = what;
    flag = false;
  };
  for (std::uint32_t x = 0; x < n && d.axioms_ok; ++x) {
    if (g.mul(x, e) != x || g.mul(e, x) != x) note(d.axioms_ok, "identity law fails at element " + std::to_string(x));
    else if (g.mul(x, g.inv(x)) != e) note(d.axioms_ok, "inverse law fails at element " + std::to_string(x));
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint32_t> pick(0, n - 1);
  auto assoc = [&](std::uint32_t x, std::uint32_t y, std::uint32_t z) {
    if (g.mul(g.mul(x, y), z) != g.mul(x, g.mul(y, z))) {
      note(d.axioms_ok, "associativity fails at (" + std::to_string(x) + "," + std::to_string(y) + "," +
                            std::to_string(z) + ")");
    }
  };
  if (n <= 120) {
    for (std::uint32_t x = 0; x < n && d.axioms_ok; ++x)
      for (std::uint32_t y = 0; y < n; ++y)
        for (std::uint32_t z = 0; z < n; ++z) assoc(x, y, z);
  } else {
    for (int i = 0; i < 20000 && d.axioms_ok; ++i) assoc(pick(rng), pick(rng), pick(rng));
  }

  std::size_t total = 0;
  for (auto s : g.class_sizes()) total += s;
  if (total != n) note(d.classes_ok, "class sizes do not sum to |G|");
  if (g.class_of(e) != 0 || g.class_size(0) != 1) note(d.classes_ok, "class 0 is not {identity}");
  auto conj_check = [&](std::uint32_t x, std::uint32_t y) {
    if (g.class_of(g.mul(g.mul(y, x), g.inv(y))) != g.class_of(x)) {
      note(d.classes_ok, "class of element " + std::to_string(x) + " not closed under conjugation");
    }
  };
  if (n <= 120) {
    for (std::uint32_t x = 0; x < n; ++x)
      for (std::uint32_t y = 0; y < n; ++y) conj_check(x, y);
  } else {
    for (int i = 0; i < 20000; ++i) conj_check(pick(rng), pick(rng));
  }

  const auto& t = g.table();
  const std::size_t k = t.k;
  for (std::size_t r = 0; r < k; ++r) {
    d.degree_square_sum += (long long)t.degrees[r] * t.degrees[r];
    if (std::abs(t(r, g.class_of(e)) - cd(t.degrees[r], 0.0)) > kTolerance) {
      note(d.degrees_ok, "degree of character " + std::to_string(r) + " differs from its value at the identity");
    }
  }
  if (d.degree_square_sum != (long long)n) note(d.degrees_ok, "sum of squared degrees differs from |G|");
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t s = 0; s < k; ++s) {
      cd acc = 0.0;
      for (std::size_t c = 0; c < k; ++c) acc += double(g.class_size(c)) * t(r, c) * std::conj(t(s, c));
      acc /= double(n);
      const double residual = std::abs(acc - cd(r == s ? 1.0 : 0.0, 0.0));
      d.row_orthogonality_residual = std::max(d.row_orthogonality_residual, residual);
    }
  }
  if (d.row_orthogonality_residual > kTolerance && d.first_failure.empty()) {
    d.first_failure = "character rows are not orthonormal";
  }
  return d;
}

CayleySpectrum cayley_laplacian_check(const FiniteGroup& g, std::span<const std::uint32_t> generators) {
  if (!g.is_abelian()) fail(ErrorCode::Unsupported, "Cayley spectrum check needs an abelian group, got " + g.descriptor());
  const std::size_t n = g.order();
  if (n > 4096) fail(ErrorCode::Capacity, "dense Laplacian limited to 4096 vertices");
  std::vector<std::uint32_t> gens(generators.begin(), generators.end());
  std::sort(gens.begin(), gens.end());
  gens.erase(std::unique(gens.begin(), gens.end()), gens.end());
  if (gens.empty()) fail(ErrorCode::InvalidGenerators, "generator set is empty");
  for (auto s : gens) {
    if (s >= n) fail(ErrorCode::InvalidGenerators, "generator index " + std::to_string(s) + " out of range");
    if (!std::binary_search(gens.begin(), gens.end(), g.inv(s))) {
      fail(ErrorCode::InvalidGenerators, "generator set is not closed under inverses (element " + g.element_label(s) + ")");
    }
  }
  std::vector<bool> reached(n, false);
  std::vector<std::uint32_t> frontier{g.identity()};
  reached[g.identity()] = true;
  std::size_t count = 1;
  while (!frontier.empty()) {
    const auto x = frontier.back();
    frontier.pop_back();
    for (auto s : gens) {
      const auto y = g.mul(s, x);
      if (!reached[y]) {
        reached[y] = true;
        ++count;
        frontier.push_back(y);
      }
    }
  }
  if (count != n) fail(ErrorCode::InvalidGenerators, "generator set does not generate " + g.descriptor());

  // L = D - A, with x ~ y whenever x = s y for some s in S.
  std::vector<double> laplacian(n * n, 0.0);
  for (std::uint32_t y = 0; y < n; ++y) {
    for (auto s : gens) {
      const auto x = g.mul(s, y);
      laplacian[std::size_t(x) * n + y] -= 1.0;
      laplacian[std::size_t(x) * n + x] += 1.0;
    }
  }

  CayleySpectrum out;
  for (std::size_t r = 0; r < g.num_classes(); ++r) {
    cd lambda = double(gens.size());
    for (auto s : gens) lambda -= g.character(r, s);
    out.max_imaginary = std::max(out.max_imaginary, std::abs(lambda.imag()));
    for (std::size_t x = 0; x < n; ++x) {
      cd lv = 0.0;
      for (std::uint32_t y = 0; y < n; ++y) {
        const double w = laplacian[x * n + y];
        if (w != 0.0) lv += w * g.character(r, y);
      }
      const double residual = std::abs(lv - lambda * g.character(r, std::uint32_t(x)));
      out.max_residual = std::max(out.max_residual, residual);
    }
    out.eigenvalues.emplace_back(r, lambda.real());
  }
  return out;
}

std::string format_complex(cd z) {
  auto snap = [](double v) { return std::abs(v) < 1e-12 ? 0.0 : v; };
  const double re = snap(z.real()), im = snap(z.imag());
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.12g%c%.12gi", re, std::signbit(im) ? '-' : '+', std::abs(im));
  return buf;
}

std::string character_table_csv(const FiniteGroup& g) {
  std::ostringstream os;
  const auto& t = g.table();
  os << "class";
  for (std::size_t c = 0; c < t.k; ++c) os << ',' << quote_csv(g.class_label(c));
  os << "\nsize";
  for (std::size_t c = 0; c < t.k; ++c) os << ',' << g.class_size(c);
  os << '\n';
  for (std::size_t r = 0; r < t.k; ++r) {
    os << "chi" << (r + 1);
    for (std::size_t c = 0; c < t.k; ++c) os << ',' << format_complex(t(r, c));
    os << '\n';
  }
  return os.str();
}

}  // namespace gscat
