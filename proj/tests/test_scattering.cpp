#include <cmath>
#include <numbers>

#include "doctest.h"
#include "gscat/error.hpp"
#include "gscat/scattering.hpp"

using namespace gscat;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::Domain;
}

long long cyclic_exponent(const FiniteGroup& g, std::size_t r) {
  const auto n = (long long)g.order();
  long long a = std::llround(std::arg(g.character(r, 1)) * double(n) / (2 * std::numbers::pi));
  return ((a % n) + n) % n;
}

std::vector<GroupPtr> small_groups() {
  return {build_cyclic(6),  build_symmetric(3), build_affine(3), build_affine(5),
          build_symmetric(4), build_product(build_cyclic(2), build_cyclic(3)), build_affine(7), build_symmetric(5)};
}

}  // namespace

TEST_CASE("paths") {
  CHECK(feature_count(3, 0) == 1);
  CHECK(feature_count(3, 2) == 13);
  CHECK(feature_count(0, 4) == 1);
  const auto l2 = paths_of_length(2, 2);
  REQUIRE(l2.size() == 4);
  CHECK(l2[0].steps == std::vector<int>{1, 1});
  CHECK(l2[1].steps == std::vector<int>{1, 2});
  CHECK(l2[3].steps == std::vector<int>{2, 2});
  CHECK(Path{}.to_string() == "()");
  CHECK(Path{{2, 1}}.to_string() == "(2,1)");
  CHECK(Path{{2, 1}}.file_stem() == "p2_1");
  CHECK(Path{{3}} < Path{{1, 1}});
  CHECK(Path{{1, 2}} < Path{{2, 1}});
}

TEST_CASE("propagation against straight-line oracle on Z/4") {
  auto z4 = build_cyclic(4);
  // gamma_j depends on the exponent a of chi_a(x) = exp(2 pi i a x / 4)
  const double g0[4] = {0.8, 0.6, 0.0, 0.6};
  const double g1[4] = {0.6, 0.8, 0.6, 0.0};
  const double g2[4] = {0.0, 0.0, 0.8, 0.8};
  Kernel k(z4, 2);
  for (std::size_t r = 0; r < 4; ++r) {
    const auto a = cyclic_exponent(*z4, r);
    k(0, r) = g0[a];
    k(1, r) = g1[a];
    k(2, r) = g2[a];
  }
  REQUIRE(is_parseval(k));
  auto psi = [&](const double* g, int x) {
    cd s = 0.0;
    for (int a = 0; a < 4; ++a) s += g[a] * std::polar(1.0, 2 * std::numbers::pi * a * x / 4.0);
    return s;
  };
  auto conv_mod = [&](const std::vector<cd>& f, const double* g) {
    std::vector<cd> out(4);
    for (int x = 0; x < 4; ++x) {
      cd s = 0.0;
      for (int y = 0; y < 4; ++y) s += f[y] * psi(g, ((x - y) % 4 + 4) % 4);
      out[x] = std::abs(s / 4.0);
    }
    return out;
  };
  std::vector<cd> f{cd(1.0, 0.5), cd(-2.0, 0.0), cd(0.25, 1.0), cd(3.0, -1.0)};
  const auto expect = conv_mod(conv_mod(f, g1), g2);
  const auto got = propagate(k, Signal(z4, f), Path{{1, 2}});
  for (int x = 0; x < 4; ++x) CHECK(std::abs(got[x] - expect[x]) < 1e-12);

  const Signal sig(z4, f);
  CHECK(max_abs_difference(propagate(k, sig, Path{}), sig) == 0.0);
  CHECK(max_abs_difference(propagate(k, Signal(z4), Path{{2, 1, 1}}), Signal(z4)) == 0.0);
  CHECK(code_of([&] { propagate(k, sig, Path{{0}}); }) == ErrorCode::Domain);
  CHECK(code_of([&] { propagate(k, sig, Path{{1, 3}}); }) == ErrorCode::Domain);
}

TEST_CASE("scatter structure") {
  std::mt19937_64 rng(20);
  auto s3 = build_symmetric(3);
  auto f = random_signal(s3, rng);

  Kernel low(s3, 2);
  for (std::size_t r = 0; r < 3; ++r) low(0, r) = 1.0;
  const auto out = scatter(low, f, 2);
  CHECK(out.features.size() == 7);
  CHECK(max_abs_difference(out.features.at(Path{}), f) < 1e-12);
  for (const auto& [p, s] : out.features)
    if (p.depth() > 0) CHECK(norm(s) == 0.0);

  auto k = random_parseval_kernel(s3, 3, rng);
  const auto m0 = scatter(k, f, 0);
  CHECK(m0.features.size() == 1);
  CHECK(max_abs_difference(m0.features.at(Path{}), convolve(synthesize(k, 0), f)) < 1e-12);

  ScatterOptions opt;
  opt.keep_propagated = true;
  const auto full = scatter(k, f, 2, opt);
  CHECK(full.features.size() == feature_count(3, 2));
  CHECK(full.propagated.size() == feature_count(3, 3));
  CHECK(full.flatten().size() == 13 * 6);
  const auto phi = synthesize(k, 0);
  Path prev;
  bool first = true;
  for (const auto& [p, s] : full.features) {
    if (!first) CHECK(prev < p);
    first = false;
    prev = p;
    const auto u = propagate(k, f, p);
    CHECK(max_abs_difference(full.propagated.at(p), u) < 1e-12);
    CHECK(max_abs_difference(s, convolve(phi, u)) < 1e-12);
  }
  for (const auto& [p, u] : full.propagated)
    if (p.depth() > 0)
      for (const auto& v : u.values()) {
        CHECK(v.imag() == 0.0);
        CHECK(v.real() >= 0.0);
      }

  Kernel raw(s3, 1);
  raw(0, 0) = 2.0;
  CHECK(code_of([&] { scatter(raw, f, 1); }) == ErrorCode::Precondition);
  CHECK(code_of([&] { scatter(k, random_signal(build_cyclic(6), rng), 1); }) == ErrorCode::Domain);
}

TEST_CASE("budget and threads") {
  std::mt19937_64 rng(22);
  auto g = build_affine(11);
  auto k = random_parseval_kernel(g, 3, rng);
  auto f = random_signal(g, rng);
  ScatterOptions tight;
  tight.budget = 1e5;
  try {
    scatter(k, f, 3, tight);
    FAIL("expected capacity error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Capacity);
    CHECK(std::string(e.what()).find("smaller M or J") != std::string::npos);
  }
  CHECK(scatter_cost(3, 2, 10) == 13.0 * 4 * 100);
  ScatterOptions one, four;
  one.threads = 1;
  four.threads = 4;
  const auto a = scatter(k, f, 2, one);
  const auto b = scatter(k, f, 2, four);
  for (const auto& [p, s] : a.features) CHECK(max_abs_difference(s, b.features.at(p)) == 0.0);
}

TEST_CASE("energy split") {
  std::mt19937_64 rng(24);
  auto aff3 = build_affine(3);
  auto k = random_parseval_kernel(aff3, 3, rng);
  const auto zero = check_energy_split(k, Signal(aff3), 0);
  CHECK(zero.propagated == 0.0);
  CHECK(zero.holds);
  for (int t = 0; t < 10; ++t) {
    auto f = random_signal(aff3, rng);
    for (std::size_t m : {0u, 1u, 2u}) {
      const auto r = check_energy_split(k, f, m);
      CHECK(r.holds);
      if (m == 0) CHECK(std::abs(r.propagated - norm_squared(f)) < 1e-12 * norm_squared(f));
    }
  }
}

TEST_CASE("nonexpansive and stable on small groups") {
  std::mt19937_64 rng(26);
  std::normal_distribution<double> normal;
  for (const auto& g : small_groups()) {
    const std::size_t M = g->order() > 60 ? 2 : 3;
    auto k = random_parseval_kernel(g, 3, rng);
    for (int t = 0; t < 50; ++t) {
      auto f = random_signal(g, rng, t % 2 == 0);
      auto f2 = f;
      for (auto& v : f2.mutable_values()) v += 1e-3 * cd(normal(rng), normal(rng));
      const auto ne = check_nonexpansive(k, f, M);
      CHECK(ne.holds);
      const auto st = check_stability(k, f, f2, M);
      CHECK(st.holds);
      if (t == 0) {
        const auto same = check_stability(k, f, f, M);
        CHECK(same.lhs == 0.0);
        CHECK(same.holds);
      }
    }
  }
  auto big = build_product(build_cyclic(28), build_cyclic(28));
  auto kb = random_parseval_kernel(big, 2, rng);
  auto f = random_signal(big, rng, true);
  auto f2 = random_signal(big, rng, true);
  CHECK(check_nonexpansive(kb, f, 2).holds);
  CHECK(check_stability(kb, f, f2, 2).holds);
}

TEST_CASE("energy preservation") {
  std::mt19937_64 rng(28);
  auto s3 = build_symmetric(3);
  Kernel low(s3, 1);
  for (std::size_t r = 0; r < 3; ++r) low(0, r) = 1.0;
  auto f = random_signal(s3, rng);
  const auto trivial = check_energy_preservation(low, f, 0);
  CHECK(std::abs(trivial.captured - norm_squared(f)) < 1e-12);
  CHECK(trivial.tail == 0.0);
  CHECK(trivial.holds);

  auto k = random_parseval_kernel(s3, 2, rng, true, 0.3);
  const auto adm = admissibility(k);
  REQUIRE(adm.beta > 0.0);
  for (int t = 0; t < 20; ++t) {
    f = random_signal(s3, rng);
    const auto r = check_energy_preservation(k, f, 3);
    CHECK(r.holds);
    CHECK(std::abs(r.captured + r.tail - r.energy) < 1e-9 * r.energy);
    CHECK(r.tail <= std::pow(adm.alpha, 4) * r.energy + 1e-12);
    CHECK(r.layer_bounds.size() == 4);
  }

  auto z2 = build_cyclic(2);
  Kernel k2(z2, 1);
  k2(0, 0) = 0.8;
  k2(1, 0) = 0.6;
  k2(0, 1) = 0.6;
  k2(1, 1) = 0.8;
  for (int t = 0; t < 20; ++t) {
    f = random_signal(z2, rng);
    const auto r = check_energy_preservation(k2, f, 3);
    CHECK(r.holds);
    CHECK(std::abs(r.tail_bound - std::pow(0.64, 4) * r.energy) < 1e-12 * r.energy);
  }

  for (const auto& g : small_groups()) {
    auto ka = random_parseval_kernel(g, 2, rng, true, 0.2);
    for (int t = 0; t < 50; ++t) CHECK(check_energy_preservation(ka, random_signal(g, rng), 2).holds);
  }
}

TEST_CASE("relaxed route") {
  std::mt19937_64 rng(30);
  auto z6 = build_cyclic(6);
  std::vector<std::size_t> S;
  Kernel kz(z6, 1);
  for (std::size_t r = 0; r < 6; ++r) {
    const auto a = cyclic_exponent(*z6, r);
    if (a == 0 || a == 1) S.push_back(r);
    const bool in_T = a == 0 || a == 1 || a == 5;
    kz(0, r) = in_T ? 0.6 : 0.0;
    kz(1, r) = in_T ? 0.8 : 1.0;
  }
  CHECK(code_of([&] { check_energy_preservation(kz, random_signal(z6, rng), 2); }) == ErrorCode::Precondition);
  const double alpha_S = 1.0 - 2.0 / 6.0 * 0.36;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    const auto signed_f = random_signal(z6, rng, true);
    const auto r = check_energy_preservation(kz, signed_f, 3, S);
    CHECK(r.relaxed);
    CHECK(r.holds);
    CHECK(std::abs(r.tail_bound - std::pow(alpha_S, 3) * r.energy) < 1e-12 * r.energy);

    std::vector<double> v(6);
    for (auto& x : v) x = u(rng);
    const auto pos = check_energy_preservation(kz, Signal::from_real(z6, v), 3, S);
    CHECK(pos.holds);
    CHECK(std::abs(pos.tail_bound - std::pow(alpha_S, 4) * pos.energy) < 1e-12 * pos.energy);
  }
}

TEST_CASE("equivariance") {
  std::mt19937_64 rng(32);
  auto s3 = build_symmetric(3);
  auto k = random_parseval_kernel(s3, 2, rng);
  auto f = random_signal(s3, rng);
  const auto id = check_equivariance(k, f, s3->identity(), 2);
  CHECK(id.left == 0.0);
  CHECK(id.right == 0.0);
  for (std::uint32_t g = 0; g < 6; ++g) CHECK(check_equivariance(k, f, g, 2).holds);

  auto aff7 = build_affine(7);
  auto k7 = random_parseval_kernel(aff7, 2, rng);
  auto f7 = random_signal(aff7, rng);
  std::uniform_int_distribution<std::uint32_t> pick(0, 41);
  for (int t = 0; t < 10; ++t) {
    const auto r = check_equivariance(k7, f7, pick(rng), 2);
    CHECK(r.holds);
    CHECK(r.left <= 1e-9);
    CHECK(r.right <= 1e-9);
  }
  CHECK(code_of([&] { check_equivariance(k, f, 6, 1); }) == ErrorCode::Domain);
}

TEST_CASE("approximate invariance") {
  std::mt19937_64 rng(34);
  auto z6 = build_cyclic(6);
  auto k = random_parseval_kernel(z6, 2, rng, true, 0.3);
  for (int t = 0; t < 10; ++t) {
    auto f = random_signal(z6, rng);
    const auto id = check_approx_invariance(k, f, z6->identity(), 3);
    for (const auto& l : id) CHECK(l.lhs == 0.0);
    for (std::uint32_t g = 0; g < 6; ++g) {
      const auto layers = check_approx_invariance(k, f, g, 3);
      REQUIRE(layers.size() == 4);
      for (const auto& l : layers) CHECK(l.holds);
    }
  }
  for (const auto& g : small_groups()) {
    auto kg = random_parseval_kernel(g, 2, rng, true, 0.2);
    for (int t = 0; t < 50; ++t) {
      auto f = random_signal(g, rng);
      std::uniform_int_distribution<std::uint32_t> pick(0, std::uint32_t(g->order() - 1));
      for (const auto& l : check_approx_invariance(kg, f, pick(rng), 2)) CHECK(l.holds);
    }
  }
  Kernel none(z6, 1);
  for (std::size_t r = 0; r < 6; ++r) none(1, r) = 1.0;
  CHECK(code_of([&] { check_approx_invariance(none, random_signal(z6, rng), 1, 1); }) == ErrorCode::Precondition);
}

TEST_CASE("depth-zero injectivity") {
  std::mt19937_64 rng(36);
  for (const auto& g : small_groups()) {
    auto k = random_parseval_kernel(g, 2, rng, true, 0.2);
    for (int t = 0; t < 50; ++t) {
      auto f = random_signal(g, rng);
      auto f2 = random_signal(g, rng);
      const auto r = check_injectivity(k, f, f2);
      CHECK(r.holds);
      CHECK(r.rhs > 0.0);
    }
  }
}
