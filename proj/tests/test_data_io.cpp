#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <queue>
#include <set>
#include <sstream>

#include "doctest.h"
#include "gscat/data_io.hpp"
#include "gscat/error.hpp"

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

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "gscat_test_data_io";
  std::filesystem::create_directories(dir);
  return dir / name;
}

// BFS distance from pi to tau where a step left-multiplies by one generator.
int bfs(const std::vector<int>& pi, const std::vector<int>& tau, const std::vector<std::vector<int>>& gens) {
  std::map<std::vector<int>, int> dist{{pi, 0}};
  std::queue<std::vector<int>> q;
  q.push(pi);
  while (!q.empty()) {
    auto x = q.front();
    q.pop();
    if (x == tau) return dist[x];
    for (const auto& g : gens) {
      auto y = perm::compose(g, x);
      if (dist.emplace(y, dist[x] + 1).second) q.push(y);
    }
  }
  return -1;
}

std::vector<int> transposition(int n, int a, int b) {
  std::vector<int> t(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) t[std::size_t(i)] = i;
  std::swap(t[std::size_t(a)], t[std::size_t(b)]);
  return t;
}

std::string wav_bytes(int format, int channels, int bits, const std::vector<std::int16_t>& data) {
  std::ostringstream os;
  auto le = [&](std::uint32_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) os.put(char((v >> (8 * i)) & 0xff));
  };
  const std::uint32_t size = std::uint32_t(data.size() * 2);
  os.write("RIFF", 4);
  le(36 + size + 12, 4);
  os.write("WAVE", 4);
  os.write("LIST", 4);  // an unrelated chunk to skip
  le(4, 4);
  os.write("abcd", 4);
  os.write("fmt ", 4);
  le(16, 4);
  le(std::uint32_t(format), 2);
  le(std::uint32_t(channels), 2);
  le(8000, 4);
  le(8000u * std::uint32_t(channels * bits / 8), 4);
  le(std::uint32_t(channels * bits / 8), 2);
  le(std::uint32_t(bits), 2);
  os.write("data", 4);
  le(size, 4);
  for (auto v : data) le(std::uint16_t(v), 2);
  return os.str();
}

}  // namespace

TEST_CASE("MNIST IDX") {
  IdxImages imgs;
  imgs.count = 3;
  imgs.rows = 28;
  imgs.cols = 28;
  imgs.pixels.resize(3 * 784);
  for (std::size_t i = 0; i < imgs.pixels.size(); ++i) imgs.pixels[i] = std::uint8_t((i * 37) % 256);
  imgs.pixels[0] = 0;
  imgs.pixels[1] = 255;
  const std::vector<std::uint8_t> labels{7, 2, 1};

  std::stringstream is, ls;
  write_idx_images(is, imgs);
  write_idx_labels(ls, labels);
  const auto back = read_idx_images(is);
  CHECK(back.count == 3);
  CHECK(back.pixels == imgs.pixels);
  CHECK(read_idx_labels(ls) == labels);

  auto grid = build_product(build_cyclic(28), build_cyclic(28));
  const auto s = image_signal(imgs, 0, grid);
  CHECK(s[0] == cd(-1.0, 0.0));
  CHECK(s[1] == cd(1.0, 0.0));
  CHECK(std::abs(s[28 * 3 + 5].real() - (imgs.pixels[28 * 3 + 5] / 127.5 - 1)) < 1e-15);

  std::stringstream bad;
  write_idx_labels(bad, labels);
  try {
    read_idx_images(bad);
    FAIL("expected format error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Format);
    CHECK(std::string(e.what()).find("byte 0") != std::string::npos);
  }
  std::stringstream shortfile(is.str().substr(0, 500));
  CHECK(code_of([&] { read_idx_images(shortfile); }) == ErrorCode::Format);

  const auto ip = scratch("imgs.idx"), lp = scratch("labels.idx");
  {
    std::ofstream a(ip, std::ios::binary), b(lp, std::ios::binary);
    write_idx_images(a, imgs);
    write_idx_labels(b, labels);
  }
  const auto ds = load_mnist(ip.string(), lp.string(), 2, grid);
  CHECK(ds.signals.size() == 2);
  CHECK(ds.labels == std::vector<int>{7, 2});
  CHECK(code_of([&] { load_mnist("/nonexistent/x", lp.string(), 2, grid); }) == ErrorCode::FileNotFound);
}

TEST_CASE("WAV reading") {
  const auto mono = wav_bytes(1, 1, 16, {0, 16384, -32768, 32767});
  std::istringstream m(mono);
  const auto clip = read_wav(m);
  CHECK(clip.sample_rate == 8000);
  REQUIRE(clip.samples.size() == 4);
  CHECK(clip.samples[1] == 0.5);
  CHECK(clip.samples[2] == -1.0);

  std::istringstream st(wav_bytes(1, 2, 16, {16384, 0, -16384, -16384}));
  const auto stereo = read_wav(st);
  REQUIRE(stereo.samples.size() == 2);
  CHECK(stereo.samples[0] == 0.25);
  CHECK(stereo.samples[1] == -0.5);

  std::istringstream flt(wav_bytes(3, 1, 32, {0, 0}));
  CHECK(code_of([&] { read_wav(flt); }) == ErrorCode::UnsupportedFormat);
  std::istringstream b24(wav_bytes(1, 1, 24, {0, 0, 0}));
  CHECK(code_of([&] { read_wav(b24); }) == ErrorCode::UnsupportedFormat);
  std::istringstream junk("not a wav file at all");
  CHECK(code_of([&] { read_wav(junk); }) == ErrorCode::Format);

  AudioClip c{{0.1, -0.2, 0.3}, 22050};
  std::stringstream rt;
  write_wav_pcm16(rt, c);
  const auto r = read_wav(rt);
  CHECK(r.sample_rate == 22050);
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(r.samples[i] - c.samples[i]) < 1e-4);
  CHECK(code_of([] { load_wav("/nonexistent.wav"); }) == ErrorCode::FileNotFound);
}

TEST_CASE("resampling and normalization") {
  AudioClip tone;
  tone.sample_rate = 44100;
  tone.samples.resize(141120);
  CHECK(std::abs(tone.duration() - 3.2) < 1e-12);
  for (std::size_t i = 0; i < tone.samples.size(); ++i)
    tone.samples[i] = 0.4 * std::sin(2 * std::numbers::pi * 440.0 * double(i) / 44100.0);
  const auto r = resample(tone, 16000);
  CHECK(r.samples.size() == 51200);
  double err = 0.0;
  for (std::size_t n = 100; n < 51100; ++n)
    err = std::max(err, std::abs(r.samples[n] - 0.4 * std::sin(2 * std::numbers::pi * 440.0 * double(n) / 16000.0)));
  CHECK(err < 2e-3);

  // content above the new Nyquist frequency is removed
  AudioClip high = tone;
  for (std::size_t i = 0; i < high.samples.size(); ++i)
    high.samples[i] = std::sin(2 * std::numbers::pi * 12000.0 * double(i) / 44100.0);
  const auto rh = resample(high, 16000, 4000);
  double peak = 0.0;
  for (std::size_t n = 100; n < 3900; ++n) peak = std::max(peak, std::abs(rh.samples[n]));
  CHECK(peak < 1e-2);

  const auto pre = preprocess_audio(tone);
  CHECK(pre.samples.size() == 32000);
  CHECK(pre.sample_rate == 16000);
  double lo = 1, hi = -1;
  for (double v : pre.samples) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(lo == -0.5);
  CHECK(hi < 0.5);
  CHECK(hi > 0.5 - 1e-5);

  AudioClip shortclip{{0.1, 0.2}, 16000};
  CHECK(preprocess_audio(shortclip).samples.size() == 32000);

  const std::vector<double> zero(10, 0.0);
  for (double v : normalize_amplitude(zero)) CHECK(v == -0.5);
  const std::vector<double> two{-3.0, 5.0};
  const auto n2 = normalize_amplitude(two);
  CHECK(n2[0] == -0.5);
  CHECK(std::abs(n2[1] - (8.0 / (8.0 + 1e-6) - 0.5)) < 1e-15);
}

TEST_CASE("Morlet transform") {
  MorletParams m;
  double l1 = 0.0, l2 = 0.0;
  const double h = 1e-3;
  for (double t = -30; t <= 30; t += h) {
    l1 += std::abs(morlet(t, m)) * h;
    l2 += std::norm(morlet(t, m)) * h;
  }
  CHECK(std::abs(l1 - 1.0) < 1e-6);
  CHECK(std::abs(std::sqrt(l2) - std::pow(2 * std::numbers::pi * 3.5, -0.25)) < 1e-6);
  CHECK(std::abs(morlet_coefficient_bound(3.5) - 0.3265) < 5e-5);

  auto aff = build_affine(7);
  const std::vector<double> zero(200, 0.0);
  CHECK(norm(morlet_cwt_to_affine(zero, aff)) == 0.0);

  std::mt19937_64 rng(60);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> x(200);
  for (auto& v : x) v = u(rng);
  x = normalize_amplitude(x);
  const auto w = morlet_cwt_to_affine(x, aff);
  // straight evaluation of one cell, [a, b] = [3, 4], L = 28
  const double delta = 3 * 28.0, s = 4 * 28.0;
  cd direct = 0.0;
  for (int t = 0; t < 200; ++t) direct += x[std::size_t(t)] * std::conj(morlet((t - s) / delta, m)) / std::sqrt(delta);
  direct *= 2.0 / 200.0;
  CHECK(std::abs(w[std::size_t(affine_index(7, 3, 4))] - direct) < 1e-14);

  CHECK(code_of([&] { morlet_cwt_to_affine(std::vector<double>(5, 0.0), aff); }) == ErrorCode::InvalidParameter);
  CHECK(code_of([&] { morlet_cwt_to_affine(x, build_cyclic(7)); }) == ErrorCode::Domain);
}

TEST_CASE("CWT coefficients obey the Morlet bound") {
  std::mt19937_64 rng(62);
  std::normal_distribution<double> normal;
  const double bound = morlet_coefficient_bound(3.5);
  for (std::uint32_t p : {19u, 31u, 61u}) {
    auto aff = build_affine(p);
    double worst = 0.0;
    for (int c = 0; c < 12; ++c) {
      std::vector<double> x(32000);
      double drift = 0.0;
      for (auto& v : x) {
        drift = 0.995 * drift + normal(rng);
        v = drift;
      }
      x = normalize_amplitude(x);
      const auto w = morlet_cwt_to_affine(x, aff);
      for (std::size_t r = 0; r < aff->num_classes(); ++r) {
        cd ip = 0.0;
        for (std::uint32_t e = 0; e < aff->order(); ++e) ip += w[e] * std::conj(aff->character(r, e));
        worst = std::max(worst, std::abs(ip) / double(aff->order()));
      }
    }
    MESSAGE("p = " << p << ": largest |<W_p f, chi>| = " << worst << " against " << bound);
    CHECK(worst <= bound);
  }
}

TEST_CASE("permutation distances") {
  // the published distances to (1,2,3) on S3, elements in one-line notation
  const std::vector<std::vector<int>> elems{{1, 2, 3}, {2, 1, 3}, {3, 2, 1}, {1, 3, 2}, {2, 3, 1}, {3, 1, 2}};
  const double r2 = std::sqrt(2.0), r6 = std::sqrt(6.0);
  const std::map<PermutationDistance, std::vector<double>> table{
      {PermutationDistance::Hamming, {0, 2, 2, 2, 3, 3}}, {PermutationDistance::Cayley, {0, 1, 1, 1, 2, 2}},
      {PermutationDistance::L2, {0, r2, 2 * r2, r2, r6, r6}}, {PermutationDistance::LInf, {0, 1, 2, 1, 2, 2}},
      {PermutationDistance::Lee, {0, 2, 2, 2, 3, 3}},      {PermutationDistance::Kendall, {0, 1, 3, 1, 2, 2}},
      {PermutationDistance::Ulam, {0, 1, 2, 1, 1, 1}}};
  const std::vector<int> id{0, 1, 2};
  for (const auto& [d, col] : table)
    for (std::size_t i = 0; i < 6; ++i) {
      std::vector<int> e = elems[i];
      for (auto& v : e) --v;
      CHECK(permutation_distance(d, id, e) == doctest::Approx(col[i]).epsilon(1e-15));
    }

  for (int n : {3, 4}) {
    const std::size_t N = perm::factorial(n);
    std::vector<std::vector<int>> all_t, adjacent;
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) all_t.push_back(transposition(n, a, b));
    for (int a = 0; a + 1 < n; ++a) adjacent.push_back(transposition(n, a, a + 1));
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < N; ++j) {
        const auto p = perm::unrank(i, n), q = perm::unrank(j, n);
        for (auto d : all_permutation_distances()) {
          const double v = permutation_distance(d, p, q);
          CHECK(v == permutation_distance(d, q, p));
          CHECK(v >= 0.0);
          if (i == j) CHECK(v == 0.0);
          if (i != j && d != PermutationDistance::LInf) CHECK(v > 0.0);
          if (d != PermutationDistance::L2) CHECK(v == std::round(v));
        }
        CHECK(permutation_distance(PermutationDistance::Cayley, p, q) == bfs(p, q, all_t));
        CHECK(permutation_distance(PermutationDistance::Kendall, p, q) == bfs(p, q, adjacent));
      }
  }
  CHECK(parse_distance("ulam") == PermutationDistance::Ulam);
  CHECK(code_of([] { parse_distance("manhattan"); }) == ErrorCode::Domain);
  CHECK(code_of([] { permutation_distance(PermutationDistance::L2, std::vector<int>{0}, std::vector<int>{0, 1}); }) ==
        ErrorCode::Domain);
}

TEST_CASE("distance and orbit families") {
  auto s3 = build_symmetric(3);
  const auto fam = distance_signals(s3, PermutationDistance::Kendall);
  CHECK(fam.signals.size() == 6);
  double mx = 0.0;
  for (const auto& v : fam.representative.values()) mx = std::max(mx, v.real());
  CHECK(mx == 1.0);
  for (std::uint32_t a = 0; a < 6; ++a) CHECK(fam.signals[a][a] == 0.0);
  CHECK(fam.representative[s3->identity()] == 0.0);
  CHECK(code_of([] { distance_signals(build_affine(5), PermutationDistance::L2); }) == ErrorCode::Domain);
  CHECK(code_of([] { distance_signals(build_symmetric(7), PermutationDistance::L2); }) == ErrorCode::Domain);

  auto s6 = build_symmetric(6);
  const auto orbits = random_orbit_signals(s6, 3, 9);
  CHECK(orbits.signals.size() == 2160);
  CHECK(orbits.labels[719] == 0);
  CHECK(orbits.labels[720] == 1);
  std::set<std::vector<double>> distinct;
  const double n0 = norm(orbits.signals[0]);
  for (std::size_t i = 0; i < 720; ++i) {
    distinct.insert(orbits.signals[i].real_part());
    CHECK(std::abs(norm(orbits.signals[i]) - n0) < 1e-12);
  }
  CHECK(distinct.size() == 720);
  for (const auto& v : orbits.signals[0].values()) {
    CHECK(v.real() >= -0.5);
    CHECK(v.real() <= 0.5);
  }
  // the generator itself is the identity translate
  CHECK(max_abs_difference(orbits.signals[s6->identity()], translate_left(orbits.signals[0], s6->identity())) == 0.0);
}
