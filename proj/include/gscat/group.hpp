#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gscat {

using cd = std::complex<double>;

/// Absolute tolerance used for complex comparisons unless a caller says otherwise.
inline constexpr double kTolerance = 1e-9;

struct GroupLimits {
  std::size_t max_order = 10000;
};

enum class GroupFamily { Cyclic, Units, Product, Affine, Symmetric, Custom };

/// Character values chi[r][c] of irreducible r on conjugacy class c.
struct CharacterTable {
  std::size_t k = 0;
  std::vector<int> degrees;
  std::vector<cd> chi;  // row-major k x k
  std::vector<std::string> labels;

  cd operator()(std::size_t r, std::size_t c) const { return chi[r * k + c]; }
  std::span<const cd> row(std::size_t r) const { return {chi.data() + r * k, k}; }
};

/// Finite group on dense element indices 0..|G|-1 with precomputed tables.
///
/// Class 0 is always {identity}. Builders order the remaining classes by
/// (size, smallest element index) and the characters by (degree, descending
/// lexicographic value vector), which puts the trivial character at row 0.
class FiniteGroup {
 public:
  struct Parts {
    std::string descriptor;
    GroupFamily family = GroupFamily::Custom;
    std::size_t order = 0;
    std::vector<std::uint32_t> mul;  // order x order, mul[x * order + y] = xy
    std::vector<std::uint32_t> inv;
    std::uint32_t identity = 0;
    std::vector<std::uint32_t> class_of;
    std::vector<std::string> element_labels;
    std::vector<std::string> class_labels;
    CharacterTable table;
  };

  /// Takes the parts as given; shapes are checked, the algebra is not (see validate_group).
  explicit FiniteGroup(Parts parts);

  const std::string& descriptor() const { return parts_.descriptor; }
  GroupFamily family() const { return parts_.family; }
  std::size_t order() const { return parts_.order; }
  std::uint32_t identity() const { return parts_.identity; }

  std::uint32_t mul(std::uint32_t x, std::uint32_t y) const { return parts_.mul[std::size_t(x) * parts_.order + y]; }
  /// Row x of the multiplication table: y -> xy.
  std::span<const std::uint32_t> mul_row(std::uint32_t x) const {
    return {parts_.mul.data() + std::size_t(x) * parts_.order, parts_.order};
  }
  std::uint32_t inv(std::uint32_t x) const { return parts_.inv[x]; }

  std::size_t num_classes() const { return class_sizes_.size(); }
  std::uint32_t class_of(std::uint32_t x) const { return parts_.class_of[x]; }
  std::span<const std::uint32_t> class_index() const { return parts_.class_of; }
  std::size_t class_size(std::size_t c) const { return class_sizes_[c]; }
  std::span<const std::size_t> class_sizes() const { return class_sizes_; }
  std::uint32_t class_rep(std::size_t c) const { return class_reps_[c]; }
  std::span<const std::uint32_t> class_members(std::size_t c) const { return class_members_[c]; }

  const std::string& element_label(std::uint32_t x) const { return parts_.element_labels[x]; }
  const std::string& class_label(std::size_t c) const { return parts_.class_labels[c]; }

  const CharacterTable& table() const { return parts_.table; }
  /// chi^r evaluated at element x.
  cd character(std::size_t r, std::uint32_t x) const { return parts_.table(r, parts_.class_of[x]); }
  int degree(std::size_t r) const { return parts_.table.degrees[r]; }
  bool is_abelian() const { return num_classes() == order(); }
  /// Row index of the trivial character.
  std::size_t trivial_character() const { return trivial_; }

  const Parts& parts() const { return parts_; }

 private:
  Parts parts_;
  std::vector<std::size_t> class_sizes_;
  std::vector<std::uint32_t> class_reps_;
  std::vector<std::vector<std::uint32_t>> class_members_;
  std::size_t trivial_ = 0;
};

using GroupPtr = std::shared_ptr<const FiniteGroup>;

bool same_group(const FiniteGroup& a, const FiniteGroup& b);

GroupPtr build_cyclic(std::size_t n, const GroupLimits& limits = {});
/// Multiplicative group of F_p, elements are the residues 1..p-1 (index = residue - 1).
GroupPtr build_units(std::uint32_t p, const GroupLimits& limits = {});
GroupPtr build_product(const GroupPtr& g1, const GroupPtr& g2, const GroupLimits& limits = {});
/// Aff(F_p): element [a,b] is x -> ax + b, stored at index (a-1)*p + b.
GroupPtr build_affine(std::uint32_t p, const GroupLimits& limits = {});
/// S_n on permutations of {0..n-1} in one-line notation, indexed lexicographically.
GroupPtr build_symmetric(int n, const GroupLimits& limits = {});

/// Parses descriptors such as "cyclic(12)", "symmetric(5)", "affine(31)",
/// "units(61)" and "product(cyclic(28),cyclic(28))".
GroupPtr build_from_descriptor(std::string_view descriptor, const GroupLimits& limits = {});

/// Reorders classes and characters of a custom group to the builders' ordering contract.
GroupPtr finalize_group(FiniteGroup::Parts parts);

bool is_prime(std::uint64_t n);
/// Smallest g >= 2 of multiplicative order p-1 (1 for p = 2).
std::uint32_t primitive_root(std::uint32_t p);

inline std::uint32_t affine_index(std::uint32_t p, std::uint32_t a, std::uint32_t b) { return (a - 1) * p + b; }
inline std::pair<std::uint32_t, std::uint32_t> affine_element(std::uint32_t p, std::uint32_t index) {
  return {index / p + 1, index % p};
}

using Partition = std::vector<int>;

/// Partitions of n, each nonincreasing, in reverse lexicographic order ((n) first).
std::vector<Partition> partitions(int n);
Partition cycle_type(std::span<const int> permutation);
/// Integer character value chi^lambda(mu) by the Murnaghan-Nakayama rule.
std::int64_t symmetric_character(const Partition& lambda, const Partition& mu);
/// Compact class notation: (2,1,1) -> "[2^1 1^2]".
std::string partition_class_label(const Partition& p);

namespace perm {
std::vector<int> unrank(std::size_t index, int n);
std::size_t rank(std::span<const int> permutation);
/// (a o b)(i) = a(b(i)).
std::vector<int> compose(std::span<const int> a, std::span<const int> b);
std::vector<int> inverse(std::span<const int> a);
std::size_t factorial(int n);
}  // namespace perm

/// Conjugacy classes from the tables alone, numbered in order of first element.
std::vector<std::uint32_t> compute_conjugacy_classes(std::size_t order, std::span<const std::uint32_t> mul,
                                                     std::span<const std::uint32_t> inv);

struct GroupDiagnostics {
  bool axioms_ok = true;
  bool classes_ok = true;
  bool degrees_ok = true;
  long long degree_square_sum = 0;
  double row_orthogonality_residual = 0.0;
  std::string first_failure;

  bool ok(double tol = kTolerance) const {
    return axioms_ok && classes_ok && degrees_ok && row_orthogonality_residual <= tol;
  }
};

/// Checks group axioms (exhaustive associativity for |G| <= 120, sampled above),
/// class invariance under conjugation, sum of squared degrees and row orthogonality.
GroupDiagnostics validate_group(const FiniteGroup& g, std::uint64_t seed = 1);

struct CayleySpectrum {
  std::vector<std::pair<std::size_t, double>> eigenvalues;  // (character row, lambda)
  double max_residual = 0.0;
  double max_imaginary = 0.0;
};

/// Assembles the Cayley-graph Laplacian of an abelian group for a symmetric
/// generating set and checks that every character is an eigenvector with
/// eigenvalue |S| - sum_s chi(s).
CayleySpectrum cayley_laplacian_check(const FiniteGroup& g, std::span<const std::uint32_t> generators);

/// CSV: class labels row, class sizes row, then one row per character of re+imi values.
std::string character_table_csv(const FiniteGroup& g);
std::string format_complex(cd z);

}  // namespace gscat
