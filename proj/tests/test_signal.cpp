#include <cmath>
#include <sstream>

#include "doctest.h"
#include "gscat/error.hpp"
#include "gscat/signal.hpp"

using namespace gscat;

namespace {

// Straight-line oracle: (f*g)(x) = (1/|G|) sum_y f(y) g(y^-1 x).
std::vector<cd> brute_convolve(const FiniteGroup& G, const std::vector<cd>& f, const std::vector<cd>& g) {
  const auto n = std::uint32_t(G.order());
  std::vector<cd> out(n);
  for (std::uint32_t x = 0; x < n; ++x) {
    cd s = 0.0;
    for (std::uint32_t y = 0; y < n; ++y) s += f[y] * g[G.mul(G.inv(y), x)];
    out[x] = s / double(n);
  }
  return out;
}

double max_diff(const std::vector<cd>& a, const std::vector<cd>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

std::vector<GroupPtr> small_groups() {
  return {build_cyclic(6), build_symmetric(3), build_affine(3), build_affine(5), build_symmetric(4),
          build_product(build_cyclic(2), build_cyclic(3)), build_product(build_symmetric(3), build_cyclic(2))};
}

}  // namespace

TEST_CASE("inner product and norms") {
  auto z4 = build_cyclic(4);
  CHECK(std::abs(inner(Signal::constant(z4, 1.0), Signal::constant(z4, 1.0)) - 1.0) < 1e-15);
  Signal e(z4);
  e[0] = 1.0;
  CHECK(std::abs(inner(e, e) - 0.25) < 1e-15);

  auto s3 = build_symmetric(3);
  std::mt19937_64 rng(7);
  auto f = random_signal(s3, rng), g = random_signal(s3, rng);
  cd brute = 0.0;
  for (std::size_t x = 0; x < 6; ++x) brute += f[x] * std::conj(g[x]);
  CHECK(std::abs(inner(f, g) - brute / 6.0) < 1e-14);
  CHECK(std::abs(norm(f) * norm(f) - inner(f, f).real()) < 1e-13);

  auto other = build_cyclic(6);
  try {
    (void)inner(f, random_signal(other, rng));
    FAIL("expected a domain error");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::Domain);
  }
}

TEST_CASE("signal invariants") {
  auto z2 = build_cyclic(2);
  CHECK_THROWS_AS(Signal(z2, std::vector<cd>{1.0}), Error);
  CHECK_THROWS_AS(Signal(z2, std::vector<cd>{1.0, std::nan("")}), Error);
  CHECK_THROWS_AS(Signal(z2, std::vector<cd>{1.0, cd(0.0, INFINITY)}), Error);
}

TEST_CASE("convolution") {
  auto z4 = build_cyclic(4);
  Signal f(z4, {1.0, 0.0, 0.0, 0.0}), g(z4, {0.0, 1.0, 0.0, 0.0});
  const auto fg = convolve(f, g);
  CHECK(max_diff(fg.values(), {0.0, 0.25, 0.0, 0.0}) < 1e-15);

  std::mt19937_64 rng(11);
  for (auto G : small_groups()) {
    auto a = random_signal(G, rng), b = random_signal(G, rng);
    CHECK(max_diff(convolve(a, b).values(), brute_convolve(*G, a.values(), b.values())) < 1e-12);
    auto ra = random_signal(G, rng, true), rb = random_signal(G, rng, true);
    CHECK(max_diff(convolve(ra, rb).values(), brute_convolve(*G, ra.values(), rb.values())) < 1e-12);
    // delta at identity (height |G|) is the identity for convolution
    const auto d = Signal::delta(G, G->identity());
    CHECK(max_diff(convolve(d, a).values(), a.values()) == 0.0);
    CHECK(max_diff(convolve(a, d).values(), a.values()) == 0.0);
  }

  auto s3 = build_symmetric(3);
  auto f3 = random_signal(s3, rng);
  const std::vector<cd> gamma{0.3, cd(-0.2, 0.5), 1.1};
  auto psi = class_function_from_coefficients(s3, gamma);
  CHECK(max_abs_difference(convolve(psi, f3), convolve(f3, psi)) < 1e-12);
  // noncommutative for generic signals
  auto g3 = random_signal(s3, rng);
  CHECK(max_abs_difference(convolve(g3, f3), convolve(f3, g3)) > 1e-3);
}

TEST_CASE("translations and involution") {
  std::mt19937_64 rng(5);
  auto s3 = build_symmetric(3);
  auto f = random_signal(s3, rng);
  CHECK(max_abs_difference(translate_left(f, s3->identity()), f) == 0.0);
  CHECK(max_abs_difference(translate_right(f, s3->identity()), f) == 0.0);
  for (std::uint32_t g = 0; g < 6; ++g) {
    CHECK(max_abs_difference(translate_left(translate_left(f, g), s3->inv(g)), f) == 0.0);
    CHECK(max_abs_difference(translate_right(translate_right(f, g), s3->inv(g)), f) == 0.0);
    CHECK(std::abs(norm(translate_left(f, g)) - norm(f)) < 1e-14);
    CHECK(distance_squared(translate_left(f, g), f) <= 4 * norm_squared(f) + 1e-12);
    // L_g f(x) = f(g^-1 x), R_g f(x) = f(x g)
    const auto L = translate_left(f, g);
    const auto R = translate_right(f, g);
    for (std::uint32_t x = 0; x < 6; ++x) {
      CHECK(L[x] == f[s3->mul(s3->inv(g), x)]);
      CHECK(R[x] == f[s3->mul(x, g)]);
    }
  }
  CHECK_THROWS_AS(translate_left(f, 6), Error);

  auto z2 = build_cyclic(2);
  Signal even(z2, {2.0, -1.0});
  CHECK(max_abs_difference(involute(even), even) == 0.0);
  auto z4 = build_cyclic(4);
  Signal s(z4, {0.0, 1.0, 0.0, 0.0});
  CHECK(max_abs_difference(involute(s), Signal(z4, {0.0, 0.0, 0.0, 1.0})) == 0.0);
  CHECK(std::abs(norm(involute(f)) - norm(f)) < 1e-14);
  CHECK(max_abs_difference(involute(involute(f)), f) == 0.0);
}

TEST_CASE("modulus") {
  auto z2 = build_cyclic(2);
  CHECK(max_abs_difference(modulus(Signal(z2, {cd(0.0, 1.0), -1.0})), Signal(z2, {1.0, 1.0})) == 0.0);
  Signal pos(z2, {0.5, 3.0});
  CHECK(max_abs_difference(modulus(pos), pos) == 0.0);
  std::mt19937_64 rng(3);
  auto s3 = build_symmetric(3);
  for (int t = 0; t < 20; ++t) {
    auto f = random_signal(s3, rng), g = random_signal(s3, rng);
    CHECK(std::abs(norm(modulus(f)) - norm(f)) < 1e-13);
    CHECK(distance_squared(modulus(f), modulus(g)) <= distance_squared(f, g) + 1e-13);
    for (std::uint32_t h = 0; h < 6; ++h) {
      CHECK(max_abs_difference(modulus(translate_left(f, h)), translate_left(modulus(f), h)) == 0.0);
      CHECK(max_abs_difference(modulus(translate_right(f, h)), translate_right(modulus(f), h)) == 0.0);
    }
  }
}

TEST_CASE("isotypic projections") {
  std::mt19937_64 rng(19);
  for (auto G : small_groups()) {
    auto f = random_signal(G, rng);
    const std::size_t k = G->num_classes();
    Signal sum(G);
    double energy = 0.0;
    std::vector<Signal> parts;
    for (std::size_t r = 0; r < k; ++r) {
      parts.push_back(isotypic_project(f, r));
      sum += parts.back();
      energy += norm_squared(parts.back());
      // P_r f = (d_r chi^r) * f by the direct route
      std::vector<cd> e(k, 0.0);
      e[r] = 1.0;
      CHECK(max_abs_difference(parts.back(), convolve(class_function_from_coefficients(G, e), f)) < 1e-12);
    }
    CHECK(max_abs_difference(sum, f) < 1e-9);
    CHECK(std::abs(energy - norm_squared(f)) < 1e-9 * norm_squared(f));
    for (std::size_t r = 0; r < k; ++r)
      for (std::size_t s = 0; s < k; ++s) {
        const auto ps = isotypic_project(parts[r], s);
        if (r == s) CHECK(max_abs_difference(ps, parts[r]) < 1e-10);
        else CHECK(norm(ps) < 1e-10);
      }
    // trivial projection is the mean
    cd mean = 0.0;
    for (auto v : f.values()) mean += v;
    mean /= double(G->order());
    CHECK(max_abs_difference(isotypic_project(f, G->trivial_character()), Signal::constant(G, mean)) < 1e-12);
  }
  auto s3 = build_symmetric(3);
  CHECK_THROWS_AS(isotypic_project(Signal(s3), 3), Error);
}

TEST_CASE("spectral energies") {
  std::mt19937_64 rng(23);
  for (auto G : small_groups()) {
    for (std::size_t r = 0; r < G->num_classes(); ++r) {
      std::vector<cd> v(G->order());
      for (std::uint32_t x = 0; x < G->order(); ++x) v[x] = G->character(r, x);
      const auto e = spectral_energies(Signal(G, v));
      for (std::size_t s = 0; s < e.size(); ++s) CHECK(std::abs(e[s] - (r == s ? 1.0 : 0.0)) < 1e-10);
    }
    const auto c = spectral_energies(Signal::constant(G, cd(0.0, 2.0)));
    CHECK(std::abs(c[G->trivial_character()] - 4.0) < 1e-12);
  }
  auto s5 = build_symmetric(5);
  auto f = random_signal(s5, rng);
  const auto e = spectral_energies(f);
  double total = 0.0;
  for (double v : e) {
    CHECK(v >= 0.0);
    total += v;
  }
  CHECK(std::abs(total - norm_squared(f)) <= 1e-9 * norm_squared(f));
}

TEST_CASE("class convolver agrees with direct convolution") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto G : small_groups()) {
    for (bool real : {false, true}) {
      auto f = random_signal(G, rng, real);
      const ClassConvolver conv(f);
      std::vector<cd> gamma(G->num_classes());
      for (auto& z : gamma) z = {u(rng), real ? 0.0 : u(rng)};
      const auto psi = class_function_from_coefficients(G, gamma);
      CHECK(max_abs_difference(conv.apply(gamma), convolve(psi, f)) < 1e-12);
      // Diagonalization: psi * f = sum_r gamma(r) P_r f
      Signal sum(G);
      for (std::size_t r = 0; r < gamma.size(); ++r) sum += gamma[r] * isotypic_project(f, r);
      CHECK(max_abs_difference(sum, convolve(psi, f)) < 1e-9);
    }
  }
}

TEST_CASE("translation covariance of convolution") {
  std::mt19937_64 rng(31);
  auto G = build_affine(5);
  auto f = random_signal(G, rng), psi_any = random_signal(G, rng);
  const std::vector<cd> gamma{0.2, 0.4, -0.1, 0.7, cd(0.0, 0.3)};
  auto psi = class_function_from_coefficients(G, gamma);
  for (std::uint32_t g = 0; g < G->order(); g += 3) {
    CHECK(max_abs_difference(convolve(translate_left(f, g), psi), translate_left(convolve(f, psi), g)) < 1e-12);
    CHECK(max_abs_difference(convolve(psi_any, translate_right(f, g)), translate_right(convolve(psi_any, f), g)) < 1e-12);
  }
  // <f, L_h psi^dagger> = (f * psi)(h)
  const auto fpsi = convolve(f, psi_any);
  for (std::uint32_t h = 0; h < G->order(); ++h) {
    CHECK(std::abs(inner(f, translate_left(involute(psi_any), h)) - fpsi[h]) < 1e-12);
  }
}

TEST_CASE("serialization round trips") {
  std::mt19937_64 rng(37);
  auto G = build_symmetric(4);
  auto f = random_signal(G, rng);
  std::stringstream csv;
  write_signal_csv(csv, f);
  CHECK(max_abs_difference(read_signal_csv(csv, G), f) == 0.0);
  std::stringstream bin(std::ios::in | std::ios::out | std::ios::binary);
  write_signal_binary(bin, f);
  CHECK(bin.str().size() == 8 + 16 * 24);
  CHECK(max_abs_difference(read_signal_binary(bin, G), f) == 0.0);
  std::stringstream truncated(bin.str().substr(0, 40));
  CHECK_THROWS_AS(read_signal_binary(truncated, G), Error);
  std::stringstream missing("index,re,im\n0,1,0\n");
  CHECK_THROWS_AS(read_signal_csv(missing, G), Error);
}
