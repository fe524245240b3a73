#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "gscat/group.hpp"

namespace gscat {

/// Complex-valued function on a finite group, values[x] = f(x).
class Signal {
 public:
  Signal() = default;
  /// Zero signal.
  explicit Signal(GroupPtr group);
  Signal(GroupPtr group, std::vector<cd> values);
  static Signal from_real(GroupPtr group, std::span<const double> values);
  static Signal constant(GroupPtr group, cd value);
  /// Point mass of height |G| at x, the convolution identity under the normalized sum.
  static Signal delta(GroupPtr group, std::uint32_t x);

  const GroupPtr& group_ptr() const { return group_; }
  const FiniteGroup& group() const { return *group_; }
  std::size_t size() const { return values_.size(); }
  const std::vector<cd>& values() const { return values_; }
  std::vector<cd>& mutable_values() { return values_; }

  cd operator[](std::size_t x) const { return values_[x]; }
  cd& operator[](std::size_t x) { return values_[x]; }

  bool is_real(double tol = 0.0) const;
  std::vector<double> real_part() const;

  Signal& operator+=(const Signal& other);
  Signal& operator-=(const Signal& other);
  Signal& operator*=(cd scale);

 private:
  GroupPtr group_;
  std::vector<cd> values_;
};

Signal operator+(Signal a, const Signal& b);
Signal operator-(Signal a, const Signal& b);
Signal operator*(cd scale, Signal a);

/// Throws a domain error unless f and g live on the same group.
void require_same_group(const Signal& f, const Signal& g);

/// (1/|G|) sum_x f(x) conj(g(x)).
cd inner(const Signal& f, const Signal& g);
double norm_squared(const Signal& f);
double norm(const Signal& f);
double distance_squared(const Signal& f, const Signal& g);
/// max_x |f(x) - g(x)|
double max_abs_difference(const Signal& f, const Signal& g);

/// (f * g)(x) = (1/|G|) sum_y f(y) g(y^-1 x), direct double loop.
Signal convolve(const Signal& f, const Signal& g);

/// L_h f(x) = f(h^-1 x)
Signal translate_left(const Signal& f, std::uint32_t h);
/// R_h f(x) = f(x h)
Signal translate_right(const Signal& f, std::uint32_t h);
/// f^dagger(x) = conj(f(x^-1))
Signal involute(const Signal& f);
/// Pointwise |f(x)|.
Signal modulus(const Signal& f);

/// Class function sum_r d_r gamma(r) chi^r as a signal.
Signal class_function_from_coefficients(const GroupPtr& group, std::span<const cd> gamma);
/// Class values sum_r d_r gamma(r) chi^r_c for each class c.
std::vector<cd> class_values_from_coefficients(const FiniteGroup& g, std::span<const cd> gamma);

/// P_r f = (d_r chi^r) * f
Signal isotypic_project(const Signal& f, std::size_t r);
/// (||P_1 f||^2, ..., ||P_k f||^2)
std::vector<double> spectral_energies(const Signal& f);

/// Convolves a fixed signal f with many class functions psi_gamma.
///
/// Nonabelian groups precompute the class sums A_c f(x) = sum_{y in C_c} f(y^-1 x)
/// once, after which psi * f = (1/|G|) sum_c psi_c A_c f costs k|G| per kernel row.
/// Abelian groups precompute the Fourier coefficients of f instead and sum
/// gamma(r) fhat(r) chi^r over the nonzero gamma(r).
class ClassConvolver {
 public:
  explicit ClassConvolver(const Signal& f);

  /// psi_gamma * f for a coefficient row gamma of length k.
  Signal apply(std::span<const cd> gamma) const;
  /// P_r f
  Signal project(std::size_t r) const;

 private:
  void apply_into(std::span<const cd> gamma, std::vector<cd>& out) const;

  GroupPtr group_;
  bool abelian_ = false;
  bool real_ = false;
  std::vector<double> sums_re_, sums_im_;  // class sums, k x |G| row-major
  std::vector<cd> fourier_;                // abelian route: <f, chi^r>
};

/// Complex Gaussian entries (or real ones when real_only), unit variance.
Signal random_signal(const GroupPtr& group, std::mt19937_64& rng, bool real_only = false);

void write_signal_csv(std::ostream& os, const Signal& f);
Signal read_signal_csv(std::istream& is, const GroupPtr& group);
void write_signal_binary(std::ostream& os, const Signal& f);
Signal read_signal_binary(std::istream& is, const GroupPtr& group);
/// Reads CSV or the binary record, chosen by the file extension (.bin is binary).
Signal load_signal_file(const std::string& path, const GroupPtr& group);
void save_signal_file(const std::string& path, const Signal& f);

}  // namespace gscat
