#include "gscat/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <cstring>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <regex>

#include "gscat/error.hpp"
#include "gscat/parallel.hpp"

namespace gscat {

namespace {

std::uint32_t read_be32(std::istream& is, const char* what) {
  unsigned char b[4];
  const auto at = static_cast<long long>(is.tellg());
  if (!is.read(reinterpret_cast<char*>(b), 4))
    fail(ErrorCode::Format, std::string("IDX file truncated in ") + what + " at byte " + std::to_string(at));
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) | b[3];
}

void write_be32(std::ostream& os, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

void read_bytes(std::istream& is, std::uint8_t* dst, std::size_t n, const char* what) {
  const auto at = static_cast<long long>(is.tellg());
  if (!is.read(reinterpret_cast<char*>(dst), std::streamsize(n)))
    fail(ErrorCode::Format, std::string("IDX file truncated in ") + what + " after byte " + std::to_string(at));
}

std::ifstream open_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::FileNotFound, "cannot open " + path);
  return in;
}

std::uint32_t le(const unsigned char* p, int bytes) {
  std::uint32_t v = 0;
  for (int i = bytes - 1; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

void put_le(std::ostream& os, std::uint32_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) os.put(char((v >> (8 * i)) & 0xff));
}

// Kaiser windowed normalized sinc.
struct SincKernel {
  double cutoff;  // fraction of the input Nyquist band kept
  double half_width;
  double beta;
  double inv_i0_beta;

  double operator()(double x) const {
    if (std::abs(x) >= half_width) return 0.0;
    const double r = x / half_width;
    const double w = std::cyl_bessel_i(0.0, beta * std::sqrt(1.0 - r * r)) * inv_i0_beta;
    const double u = cutoff * x;
    const double s = u == 0.0 ? 1.0 : std::sin(std::numbers::pi * u) / (std::numbers::pi * u);
    return cutoff * s * w;
  }
};

}  // namespace

IdxImages read_idx_images(std::istream& is, std::size_t limit) {
  const auto magic = read_be32(is, "magic");
  if (magic != 2051) fail(ErrorCode::Format, "IDX image magic " + std::to_string(magic) + " at byte 0, expected 2051");
  IdxImages out;
  out.count = read_be32(is, "count");
  out.rows = read_be32(is, "rows");
  out.cols = read_be32(is, "cols");
  if (out.rows == 0 || out.cols == 0 || out.rows * out.cols > (1u << 20))
    fail(ErrorCode::Format, "implausible IDX image size at byte 8");
  if (limit && limit < out.count) out.count = limit;
  out.pixels.resize(out.count * out.rows * out.cols);
  read_bytes(is, out.pixels.data(), out.pixels.size(), "pixels");
  return out;
}

std::vector<std::uint8_t> read_idx_labels(std::istream& is, std::size_t limit) {
  const auto magic = read_be32(is, "magic");
  if (magic != 2049) fail(ErrorCode::Format, "IDX label magic " + std::to_string(magic) + " at byte 0, expected 2049");
  std::size_t count = read_be32(is, "count");
  if (limit && limit < count) count = limit;
  std::vector<std::uint8_t> out(count);
  read_bytes(is, out.data(), count, "labels");
  return out;
}

void write_idx_images(std::ostream& os, const IdxImages& images) {
  write_be32(os, 2051);
  write_be32(os, std::uint32_t(images.count));
  write_be32(os, std::uint32_t(images.rows));
  write_be32(os, std::uint32_t(images.cols));
  os.write(reinterpret_cast<const char*>(images.pixels.data()), std::streamsize(images.pixels.size()));
}

void write_idx_labels(std::ostream& os, std::span<const std::uint8_t> labels) {
  write_be32(os, 2049);
  write_be32(os, std::uint32_t(labels.size()));
  os.write(reinterpret_cast<const char*>(labels.data()), std::streamsize(labels.size()));
}

Signal image_signal(const IdxImages& images, std::size_t i, const GroupPtr& grid) {
  const std::size_t n = images.rows * images.cols;
  if (grid->order() != n)
    fail(ErrorCode::Domain, "image of " + std::to_string(n) + " pixels on a group of order " + std::to_string(grid->order()));
  if (i >= images.count) fail(ErrorCode::Domain, "image index " + std::to_string(i) + " out of range");
  std::vector<double> v(n);
  for (std::size_t k = 0; k < n; ++k) v[k] = double(images.pixels[i * n + k]) / 127.5 - 1.0;
  return Signal::from_real(grid, v);
}

LabeledSignals load_mnist(const std::string& image_path, const std::string& label_path, std::size_t count,
                          const GroupPtr& grid) {
  auto img_in = open_binary(image_path);
  auto lbl_in = open_binary(label_path);
  const auto images = read_idx_images(img_in, count);
  const auto labels = read_idx_labels(lbl_in, count);
  if (labels.size() < images.count) fail(ErrorCode::Format, "fewer labels than images in " + label_path);
  LabeledSignals out;
  for (std::size_t i = 0; i < images.count; ++i) {
    out.signals.push_back(image_signal(images, i, grid));
    out.labels.push_back(labels[i]);
  }
  return out;
}

AudioClip read_wav(std::istream& is) {
  unsigned char h[12];
  if (!is.read(reinterpret_cast<char*>(h), 12) || std::memcmp(h, "RIFF", 4) != 0 || std::memcmp(h + 8, "WAVE", 4) != 0)
    fail(ErrorCode::Format, "not a RIFF/WAVE file");
  int channels = 0, bits = 0, rate = 0;
  bool have_fmt = false;
  for (;;) {
    unsigned char ch[8];
    if (!is.read(reinterpret_cast<char*>(ch), 8)) fail(ErrorCode::Format, "WAV file has no data chunk");
    const std::uint32_t size = le(ch + 4, 4);
    if (std::memcmp(ch, "fmt ", 4) == 0) {
      std::vector<unsigned char> f(size);
      if (size < 16 || !is.read(reinterpret_cast<char*>(f.data()), size))
        fail(ErrorCode::Format, "short WAV fmt chunk");
      std::uint32_t format = le(f.data(), 2);
      if (format == 0xFFFE && size >= 26) format = le(f.data() + 24, 2);
      if (format != 1) fail(ErrorCode::UnsupportedFormat, "WAV format code " + std::to_string(format) + " is not PCM");
      channels = int(le(f.data() + 2, 2));
      rate = int(le(f.data() + 4, 4));
      bits = int(le(f.data() + 14, 2));
      if (bits != 16) fail(ErrorCode::UnsupportedFormat, "only 16-bit PCM is supported, got " + std::to_string(bits));
      if (channels < 1 || rate <= 0) fail(ErrorCode::Format, "bad WAV channel count or rate");
      have_fmt = true;
      if (size % 2) is.ignore(1);
    } else if (std::memcmp(ch, "data", 4) == 0) {
      if (!have_fmt) fail(ErrorCode::Format, "WAV data chunk before fmt chunk");
      std::vector<unsigned char> d(size);
      is.read(reinterpret_cast<char*>(d.data()), size);
      const std::size_t got = std::size_t(is.gcount());
      const std::size_t frames = got / (2 * std::size_t(channels));
      AudioClip clip;
      clip.sample_rate = rate;
      clip.samples.resize(frames);
      for (std::size_t i = 0; i < frames; ++i) {
        double s = 0.0;
        for (int c = 0; c < channels; ++c) {
          const auto raw = std::int16_t(le(d.data() + 2 * (i * std::size_t(channels) + std::size_t(c)), 2));
          s += raw / 32768.0;
        }
        clip.samples[i] = s / channels;
      }
      return clip;
    } else {
      is.ignore(std::streamsize(size + (size % 2)));
    }
  }
}

AudioClip load_wav(const std::string& path) {
  auto in = open_binary(path);
  return read_wav(in);
}

void write_wav_pcm16(std::ostream& os, const AudioClip& clip) {
  const std::uint32_t data = std::uint32_t(clip.samples.size() * 2);
  os.write("RIFF", 4);
  put_le(os, 36 + data, 4);
  os.write("WAVEfmt ", 8);
  put_le(os, 16, 4);
  put_le(os, 1, 2);
  put_le(os, 1, 2);
  put_le(os, std::uint32_t(clip.sample_rate), 4);
  put_le(os, std::uint32_t(clip.sample_rate) * 2, 4);
  put_le(os, 2, 2);
  put_le(os, 16, 2);
  os.write("data", 4);
  put_le(os, data, 4);
  for (double s : clip.samples) {
    const double c = std::clamp(s, -1.0, 1.0);
    const auto v = std::int16_t(std::clamp(std::lround(c * 32767.0), -32768L, 32767L));
    put_le(os, std::uint16_t(v), 2);
  }
}

AudioClip resample(const AudioClip& clip, int target_rate, std::size_t max_output) {
  if (clip.sample_rate <= 0 || target_rate <= 0) fail(ErrorCode::InvalidParameter, "sample rates must be positive");
  AudioClip out;
  out.sample_rate = target_rate;
  if (clip.sample_rate == target_rate) {
    out.samples = clip.samples;
    if (max_output && out.samples.size() > max_output) out.samples.resize(max_output);
    return out;
  }
  const double ratio = double(target_rate) / clip.sample_rate;
  std::size_t n_out = std::size_t(std::floor(double(clip.samples.size()) * ratio));
  if (max_output) n_out = std::min(n_out, max_output);
  const double beta = 8.6;
  SincKernel h{std::min(1.0, ratio), 0.0, beta, 1.0 / std::cyl_bessel_i(0.0, beta)};
  h.half_width = 16.0 / h.cutoff;
  out.samples.resize(n_out);
  const long N = long(clip.samples.size());
  // output n sits at input time n * down / up; its phase repeats with period up
  const long g = std::gcd(long(clip.sample_rate), long(target_rate));
  const long up = target_rate / g, down = clip.sample_rate / g;
  const long reach = long(std::floor(h.half_width));
  if (up <= 4096) {
    const long taps = 2 * reach + 2;
    std::vector<double> table(std::size_t(up * taps));
    for (long ph = 0; ph < up; ++ph)
      for (long i = 0; i < taps; ++i) table[std::size_t(ph * taps + i)] = h(double(ph) / double(up) - double(i - reach));
    for (std::size_t n = 0; n < n_out; ++n) {
      const long num = long(n) * down, base = num / up, ph = num % up;
      const double* w = table.data() + ph * taps;
      double s = 0.0;
      for (long i = 0; i < taps; ++i) {
        const long k = base + i - reach;
        if (k >= 0 && k < N) s += clip.samples[std::size_t(k)] * w[i];
      }
      out.samples[n] = s;
    }
    return out;
  }
  for (std::size_t n = 0; n < n_out; ++n) {
    const double t = double(n) / ratio;
    const long lo = std::max(0L, long(std::ceil(t - h.half_width)));
    const long hi = std::min(N - 1, long(std::floor(t + h.half_width)));
    double s = 0.0;
    for (long k = lo; k <= hi; ++k) s += clip.samples[std::size_t(k)] * h(t - double(k));
    out.samples[n] = s;
  }
  return out;
}

std::vector<double> normalize_amplitude(std::span<const double> x, double eps) {
  std::vector<double> out(x.size());
  if (x.empty()) return out;
  const auto [mn, mx] = std::minmax_element(x.begin(), x.end());
  const double lo = *mn, span = *mx - *mn + eps;
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - lo) / span - 0.5;
  return out;
}

AudioClip preprocess_audio(const AudioClip& clip, const AudioPreprocessing& pre) {
  auto r = resample(clip, pre.sample_rate, pre.length);
  r.samples.resize(pre.length, 0.0);
  r.samples = normalize_amplitude(r.samples, pre.eps);
  return r;
}

cd morlet(double t, const MorletParams& m) {
  return std::exp(-t * t / m.B) / std::sqrt(std::numbers::pi * m.B) * std::polar(1.0, 2 * std::numbers::pi * m.C * t);
}

double morlet_coefficient_bound(double B) { return std::pow(2 * std::numbers::pi * B, -0.25) / std::sqrt(2.0); }

Signal morlet_cwt_to_affine(std::span<const double> clip, const GroupPtr& affine, const MorletParams& m,
                            unsigned threads) {
  static const std::regex re(R"(affine\((\d+)\))");
  std::smatch match;
  if (!std::regex_match(affine->descriptor(), match, re))
    fail(ErrorCode::Domain, "CWT target must be an affine(p) group, got " + affine->descriptor());
  const std::size_t p = std::stoul(match[1]);
  const std::size_t T = clip.size();
  if (T < p) fail(ErrorCode::InvalidParameter, "clip of " + std::to_string(T) + " samples is shorter than p = " + std::to_string(p));
  const std::size_t L = T / p;
  // offsets u = t - s run over -(p-1)L .. T-1
  const long umin = -long((p - 1) * L);
  std::vector<cd> out(p * (p - 1));
  parallel_for(p - 1, threads, [&](std::size_t ai) {
    const std::size_t a = ai + 1;
    const double delta = double(a * L);
    const double scale = 2.0 / double(T) / std::sqrt(delta);
    std::vector<cd> k(std::size_t(long(T) - umin));
    for (std::size_t i = 0; i < k.size(); ++i) k[i] = std::conj(morlet(double(long(i) + umin) / delta, m)) * scale;
    for (std::size_t b = 0; b < p; ++b) {
      const long s = long(b * L);
      cd acc = 0.0;
      const cd* kk = k.data() + (-s - umin);
      for (std::size_t t = 0; t < T; ++t) acc += clip[t] * kk[t];
      out[(a - 1) * p + b] = acc;
    }
  });
  return Signal(affine, std::move(out));
}

std::vector<PermutationDistance> all_permutation_distances() {
  return {PermutationDistance::Hamming, PermutationDistance::Cayley,  PermutationDistance::L2,
          PermutationDistance::LInf,    PermutationDistance::Kendall, PermutationDistance::Ulam,
          PermutationDistance::Lee};
}

std::string distance_name(PermutationDistance d) {
  switch (d) {
    case PermutationDistance::Hamming:
      return "hamming";
    case PermutationDistance::Cayley:
      return "cayley";
    case PermutationDistance::L2:
      return "l2";
    case PermutationDistance::LInf:
      return "linf";
    case PermutationDistance::Kendall:
      return "kendall";
    case PermutationDistance::Ulam:
      return "ulam";
    case PermutationDistance::Lee:
      return "lee";
  }
  return "";
}

PermutationDistance parse_distance(const std::string& name) {
  for (auto d : all_permutation_distances())
    if (distance_name(d) == name) return d;
  fail(ErrorCode::Domain, "unknown permutation distance '" + name + "'");
}

double permutation_distance(PermutationDistance d, std::span<const int> pi, std::span<const int> tau) {
  if (pi.size() != tau.size()) fail(ErrorCode::Domain, "permutations of different degree");
  const int n = int(pi.size());
  switch (d) {
    case PermutationDistance::Hamming: {
      int c = 0;
      for (int i = 0; i < n; ++i) c += pi[std::size_t(i)] != tau[std::size_t(i)];
      return c;
    }
    case PermutationDistance::L2: {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += std::pow(pi[std::size_t(i)] - tau[std::size_t(i)], 2);
      return std::sqrt(s);
    }
    case PermutationDistance::LInf: {
      int m = 0;
      for (int i = 0; i < n; ++i) m = std::max(m, std::abs(pi[std::size_t(i)] - tau[std::size_t(i)]));
      return m;
    }
    case PermutationDistance::Lee: {
      int s = 0;
      for (int i = 0; i < n; ++i) {
        const int t = std::abs(pi[std::size_t(i)] - tau[std::size_t(i)]);
        s += std::min(t, n - t);
      }
      return s;
    }
    default:
      break;
  }
  // the rest depend on w = tau pi^-1
  const auto w = perm::compose(tau, perm::inverse(pi));
  switch (d) {
    case PermutationDistance::Cayley: {
      std::vector<char> seen(std::size_t(n), 0);
      int cycles = 0;
      for (int i = 0; i < n; ++i) {
        if (seen[std::size_t(i)]) continue;
        ++cycles;
        for (int j = i; !seen[std::size_t(j)]; j = w[std::size_t(j)]) seen[std::size_t(j)] = 1;
      }
      return n - cycles;
    }
    case PermutationDistance::Kendall: {
      int inv = 0;
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) inv += w[std::size_t(i)] > w[std::size_t(j)];
      return inv;
    }
    case PermutationDistance::Ulam: {
      std::vector<int> tails;
      for (int v : w) {
        auto it = std::lower_bound(tails.begin(), tails.end(), v);
        if (it == tails.end())
          tails.push_back(v);
        else
          *it = v;
      }
      return n - int(tails.size());
    }
    default:
      break;
  }
  fail(ErrorCode::Domain, "unsupported permutation distance");
}

int symmetric_degree(const FiniteGroup& g) {
  static const std::regex re(R"(symmetric\((\d+)\))");
  std::smatch m;
  if (!std::regex_match(g.descriptor(), m, re))
    fail(ErrorCode::Domain, "expected a symmetric(n) group, got " + g.descriptor());
  return std::stoi(m[1]);
}

DistanceFamily distance_signals(const GroupPtr& symmetric, PermutationDistance d) {
  const int n = symmetric_degree(*symmetric);
  if (n > 6) fail(ErrorCode::Domain, "distance families are generated for n <= 6");
  const std::size_t N = symmetric->order();
  std::vector<std::vector<int>> elems(N);
  for (std::size_t i = 0; i < N; ++i) elems[i] = perm::unrank(i, n);
  DistanceFamily fam;
  for (std::size_t a = 0; a < N; ++a) {
    std::vector<double> v(N);
    for (std::size_t b = 0; b < N; ++b) v[b] = permutation_distance(d, elems[a], elems[b]);
    fam.signals.push_back(Signal::from_real(symmetric, v));
  }
  const Signal& base = fam.signals[symmetric->identity()];
  double mx = 0.0;
  for (const auto& v : base.values()) mx = std::max(mx, std::abs(v));
  fam.representative = base;
  if (mx > 0) fam.representative *= 1.0 / mx;
  return fam;
}

LabeledSignals random_orbit_signals(const GroupPtr& group, int n_classes, std::uint64_t seed) {
  if (n_classes < 1) fail(ErrorCode::InvalidParameter, "need at least one class");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  LabeledSignals out;
  for (int c = 0; c < n_classes; ++c) {
    std::vector<double> v(group->order());
    for (auto& x : v) x = u(rng);
    const auto f = Signal::from_real(group, v);
    for (std::uint32_t t = 0; t < group->order(); ++t) {
      out.signals.push_back(translate_left(f, t));
      out.labels.push_back(c);
    }
  }
  return out;
}

}  // namespace gscat
