#pragma once

#include <string>
#include <vector>

#include "gscat/group.hpp"
#include "gscat/signal.hpp"
#include "gscat/wavelet.hpp"

namespace gscat {

enum class PrototypeFamily { MexicanHat, Shannon, Constant };

/// Analytic prototype sampled on a Z/n x Z/m grid.
struct PrototypeSpec {
  PrototypeFamily family = PrototypeFamily::MexicanHat;
  double sigma = 2.0;
  double fx = 1.5707963267948966;
  double fy = 1.5707963267948966;
  double theta = 0.0;     // rotation applied to (x, y) before evaluation, in [0, 2 pi)
  double dilation = 1.0;  // coordinates are scaled by this factor after rotation
  double value = 1.0;     // constant family only
};

/// Prototype value at centered coordinates (x, y).
double evaluate_prototype(const PrototypeSpec& spec, double x, double y);

struct GridShape {
  std::size_t rows = 0;
  std::size_t cols = 0;
};

/// Reads (n, m) from a product(cyclic(n),cyclic(m)) group; cyclic(n) is n x 1.
GridShape grid_shape(const FiniteGroup& g);

/// Samples the prototype at x = row offset, y = column offset with
/// centered coordinates -n/2..n/2-1 wrapped onto residues.
Signal sample_prototype(const PrototypeSpec& spec, const GroupPtr& grid);

/// Mexican hat low-pass followed by J Shannon wavelets. Wavelet i (1-based)
/// is rotated by pi (i-1) / J and the second half is dilated by 0.5.
std::vector<PrototypeSpec> default_prototype_specs(std::size_t J);

/// First spec is the low-pass, the rest are wavelets; the kernel is normalized to Parseval.
Kernel prototype_kernel(const std::vector<PrototypeSpec>& specs, const GroupPtr& grid);

/// C(r) = mean over signals of |<f, chi^r>|; all zero for an empty set.
std::vector<double> class_mean_magnitudes(const GroupPtr& group, const std::vector<Signal>& signals);

/// gamma_1 = C_B where C_B >= C_M, gamma_2 = -C_M where C_B < C_M, gamma_0 completes Parseval.
Kernel affine_twoclass_kernel(const GroupPtr& group, const std::vector<Signal>& class_b,
                              const std::vector<Signal>& class_m);

/// f / max|f|; the zero signal is returned unchanged.
Signal normalize_by_max(const Signal& f);

/// gamma_j(r) = |<d_j, chi^r>| / sqrt(J) for normalized distance representatives d_j.
Kernel distance_class_kernel(const std::vector<Signal>& representatives);

/// gamma_j(r) = |<f_j, chi^r>| for orbit generators f_j.
Kernel random_orbit_kernel(const std::vector<Signal>& generators);

enum class Recipe { AffineTwoClass, DistanceClasses, RandomOrbits };

Recipe parse_recipe(const std::string& tag);
std::string recipe_tag(Recipe recipe);

/// Builds a kernel from labelled training signals. Class order follows the
/// first appearance of each label. The distance and orbit recipes use the first
/// signal of each class as its representative; the two-class recipe needs
/// exactly two labels (the first is class B).
Kernel learn_kernel(Recipe recipe, const std::vector<Signal>& signals, const std::vector<std::string>& labels);

}  // namespace gscat
