#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gscat/group.hpp"
#include "gscat/signal.hpp"

namespace gscat {

// ---- MNIST IDX ----

struct IdxImages {
  std::size_t count = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> pixels;  // count x rows x cols
};

/// Reads at most `limit` images (0 reads all). Magic 2051, big-endian header.
IdxImages read_idx_images(std::istream& is, std::size_t limit = 0);
/// Magic 2049.
std::vector<std::uint8_t> read_idx_labels(std::istream& is, std::size_t limit = 0);
void write_idx_images(std::ostream& os, const IdxImages& images);
void write_idx_labels(std::ostream& os, std::span<const std::uint8_t> labels);

/// Pixel v at (r, c) becomes v / 127.5 - 1 at element r * cols + c of Z/rows x Z/cols.
Signal image_signal(const IdxImages& images, std::size_t i, const GroupPtr& grid);

struct LabeledSignals {
  std::vector<Signal> signals;
  std::vector<int> labels;
};

/// First `count` images of an IDX pair as signals on Z/28 x Z/28.
LabeledSignals load_mnist(const std::string& image_path, const std::string& label_path, std::size_t count,
                          const GroupPtr& grid);

// ---- audio ----

struct AudioClip {
  std::vector<double> samples;
  int sample_rate = 0;

  double duration() const { return sample_rate ? double(samples.size()) / sample_rate : 0.0; }
};

/// PCM 16-bit WAV; channels are averaged to mono and scaled to [-1, 1).
AudioClip read_wav(std::istream& is);
AudioClip load_wav(const std::string& path);
/// Mono PCM 16-bit, samples clipped to [-1, 1].
void write_wav_pcm16(std::ostream& os, const AudioClip& clip);

/// Kaiser windowed sinc (32 zero crossings, beta 8.6) evaluated for the first
/// `max_output` output samples (0 means all).
AudioClip resample(const AudioClip& clip, int target_rate, std::size_t max_output = 0);

/// (x - min) / (max - min + eps) - 1/2
std::vector<double> normalize_amplitude(std::span<const double> x, double eps = 1e-6);

struct AudioPreprocessing {
  int sample_rate = 16000;
  std::size_t length = 32000;
  double eps = 1e-6;
};

/// Resample, keep the first `length` samples (zero padded), normalize.
AudioClip preprocess_audio(const AudioClip& clip, const AudioPreprocessing& pre = {});

struct MorletParams {
  double B = 3.5;
  double C = 1.5;
};

/// Psi(t) = (pi B)^-1/2 exp(-t^2 / B) exp(2 pi i C t)
cd morlet(double t, const MorletParams& m = {});
/// (1/sqrt 2)(2 pi B)^-1/4
double morlet_coefficient_bound(double B);

/// W f(a L, b L) with L = floor(T/p), a = 1..p-1, b = 0..p-1, stored at [a, b]
/// of Aff(F_p). The signal is zero outside 0..T-1.
Signal morlet_cwt_to_affine(std::span<const double> clip, const GroupPtr& affine, const MorletParams& m = {},
                            unsigned threads = 0);

// ---- permutation distances ----

enum class PermutationDistance { Hamming, Cayley, L2, LInf, Kendall, Ulam, Lee };

std::vector<PermutationDistance> all_permutation_distances();
std::string distance_name(PermutationDistance d);
PermutationDistance parse_distance(const std::string& name);

/// Distance between permutations given as 0-based one-line images.
double permutation_distance(PermutationDistance d, std::span<const int> pi, std::span<const int> tau);

/// n of a symmetric(n) group.
int symmetric_degree(const FiniteGroup& g);

struct DistanceFamily {
  std::vector<Signal> signals;  // signals[pi](tau) = d(pi, tau), pi in element order
  Signal representative;        // d(identity, .) / max
};

DistanceFamily distance_signals(const GroupPtr& symmetric, PermutationDistance d);

/// Class i is the left-translation orbit {L_tau f_i : tau in G} of a function
/// with values uniform in [-0.5, 0.5]; members appear in element order of tau.
LabeledSignals random_orbit_signals(const GroupPtr& group, int n_classes, std::uint64_t seed);

}  // namespace gscat
