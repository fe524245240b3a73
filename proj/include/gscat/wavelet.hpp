#pragma once

#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "gscat/group.hpp"
#include "gscat/signal.hpp"

namespace gscat {

/// Coefficients gamma_j(r), j = 0..J (row 0 is the low-pass), r = 0..k-1.
class Kernel {
 public:
  Kernel() = default;
  Kernel(GroupPtr group, std::size_t J);
  Kernel(GroupPtr group, std::size_t J, std::vector<cd> gamma);

  const GroupPtr& group_ptr() const { return group_; }
  const FiniteGroup& group() const { return *group_; }
  std::size_t J() const { return J_; }
  std::size_t rows() const { return J_ + 1; }
  std::size_t k() const { return k_; }

  cd operator()(std::size_t j, std::size_t r) const { return gamma_[j * k_ + r]; }
  cd& operator()(std::size_t j, std::size_t r) { return gamma_[j * k_ + r]; }
  std::span<const cd> row(std::size_t j) const { return {gamma_.data() + j * k_, k_}; }
  const std::vector<cd>& coefficients() const { return gamma_; }

  /// Kernel of the involuted wavelets psi_j^dagger, i.e. conj(gamma).
  Kernel conjugate() const;

 private:
  GroupPtr group_;
  std::size_t J_ = 0;
  std::size_t k_ = 0;
  std::vector<cd> gamma_;
};

/// psi_j(x) = sum_r d_r gamma_j(r) chi^r(x)
Signal synthesize(const Kernel& kernel, std::size_t j);

/// C(r) = sum_j |gamma_j(r)|^2
std::vector<double> calderon_sums(const Kernel& kernel);
/// Largest |C(r) - 1|.
double parseval_defect(const Kernel& kernel);
bool is_parseval(const Kernel& kernel, double tol = 1e-9);

/// Divides every column r by sqrt(C(r)); all-zero columns become gamma_0(r) = 1.
Kernel normalize_parseval(const Kernel& raw);
/// Expands prototypes in characters, gamma~_j(r) = <proto_j, chi^r>, then normalizes.
/// Entries below 1e-13 of the largest one are treated as zero.
Kernel normalize_parseval(const std::vector<Signal>& prototypes);

struct FrameReport {
  double A = 0.0;
  double B = 0.0;
  double min_ratio = 0.0;  // min over trials of sum_j ||psi_j * f||^2 / ||f||^2
  double max_ratio = 0.0;
  bool verified = false;
};

/// A = min_r C(r), B = max_r C(r), plus an empirical check on random signals.
FrameReport frame_bounds(const Kernel& kernel, int trials = 50, std::uint64_t seed = 1);

/// Wf(j, .) = f * psi_j for j = 0..J.
std::vector<Signal> analyze(const Kernel& kernel, const Signal& f);
/// f = sum_j Wf(j, .) * psi_j^dagger. Needs C(r) = 1 to within 1e-6.
Signal reconstruct(const Kernel& kernel, const std::vector<Signal>& coefficients);

struct RelaxedAdmissibility {
  std::vector<std::size_t> S;
  std::vector<std::size_t> T;
  long long deg = 0;
  double beta = 0.0;
  double alpha = 1.0;
};

struct AdmissibilityReport {
  double beta = 0.0;
  double alpha = 1.0;
  double gamma0_max = 0.0;
  std::optional<RelaxedAdmissibility> relaxed;
};

AdmissibilityReport admissibility(const Kernel& kernel);

/// n_S(r): multiplicity of irreducible r in rho^S (x) (rho^S)^dagger, rho^S = sum_{s in S} d_s pi^s.
std::vector<long long> tensor_multiplicities(const FiniteGroup& g, std::span<const std::size_t> S);
/// Support of n_S.
std::vector<std::size_t> tensor_support(const FiniteGroup& g, std::span<const std::size_t> S);
long long subset_degree(const FiniteGroup& g, std::span<const std::size_t> S);

AdmissibilityReport relaxed_admissibility(const Kernel& kernel, std::span<const std::size_t> S);

struct KuehCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

/// lhs = sum_{r in T(S)} ||P_r f||^2 against rhs = deg(S)/|G| ||f||^2 for nonnegative f.
KuehCheck kueh_bound_check(const Signal& f, std::span<const std::size_t> S);

/// Random Parseval kernel. The low-pass column is drawn from [lowpass_floor, 1]
/// before normalization so admissibility can be controlled.
Kernel random_parseval_kernel(const GroupPtr& group, std::size_t J, std::mt19937_64& rng, bool complex_values = true,
                              double lowpass_floor = 0.0);

/// CSV: "J,k,group" header, one line "<J>,<k>,<descriptor>", then rows "j,re,im,re,im,...".
void write_kernel_csv(std::ostream& os, const Kernel& kernel);
/// Reads a kernel; the group is built from the stored descriptor unless one is given.
Kernel read_kernel_csv(std::istream& is, GroupPtr group = nullptr);
Kernel load_kernel_file(const std::string& path, GroupPtr group = nullptr);
void save_kernel_file(const std::string& path, const Kernel& kernel);

}  // namespace gscat
