#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gscat/signal.hpp"
#include "gscat/wavelet.hpp"

namespace gscat {

/// Sequence of scales j_1..j_m in 1..J; empty is the root path.
struct Path {
  std::vector<int> steps;

  std::size_t depth() const { return steps.size(); }
  Path extended(int j) const;
  /// "()" for the root, otherwise "(1,3,2)".
  std::string to_string() const;
  /// "root" or "p1_3_2", safe as a file name.
  std::string file_stem() const;

  /// Depth first, then lexicographic.
  friend bool operator<(const Path& a, const Path& b) {
    if (a.steps.size() != b.steps.size()) return a.steps.size() < b.steps.size();
    return a.steps < b.steps;
  }
  friend bool operator==(const Path& a, const Path& b) = default;
};

/// All paths of length m over 1..J in lexicographic order.
std::vector<Path> paths_of_length(std::size_t J, std::size_t m);
/// sum_{m <= M} J^m
std::size_t feature_count(std::size_t J, std::size_t M);

struct ScatterOptions {
  /// Upper bound on complex multiply-adds, estimated as (sum_{m<=M} J^m)(J+1)|G|^2.
  double budget = 1e9;
  bool keep_propagated = false;
  /// Also compute U on layer M+1, which gives the exact tail energy.
  bool with_tail = true;
  /// 0 picks the hardware concurrency.
  unsigned threads = 0;
};

struct ScatteringOutput {
  std::size_t depth = 0;
  std::size_t J = 0;
  std::map<Path, Signal> features;
  /// U[p]f for |p| <= M+1, filled only when keep_propagated is set.
  std::map<Path, Signal> propagated;
  /// sum over layer m of ||S[p]f||^2, m = 0..M
  std::vector<double> layer_feature_energy;
  /// sum over layer m of ||U[p]f||^2, m = 0..M (+1 with the tail)
  std::vector<double> layer_propagated_energy;

  double feature_energy() const;
  /// Layer M+1 propagated energy; throws if the tail was not computed.
  double tail_energy() const;
  /// Concatenation of the features in path order.
  std::vector<cd> flatten() const;
};

/// U[p]f = |psi_{j_m} * ... |psi_{j_1} * f||
Signal propagate(const Kernel& kernel, const Signal& f, const Path& p);

/// Estimated operation count used by the budget check.
double scatter_cost(std::size_t J, std::size_t M, std::size_t order);

ScatteringOutput scatter(const Kernel& kernel, const Signal& f, std::size_t M, const ScatterOptions& options = {});

struct EnergySplit {
  double propagated = 0.0;       // sum over layer m of ||U[p]f||^2
  double propagated_next = 0.0;  // layer m+1
  double features = 0.0;         // sum over layer m of ||S[p]f||^2
  double residual = 0.0;         // |propagated - propagated_next - features|
  bool holds = false;
};

EnergySplit check_energy_split(const Kernel& kernel, const Signal& f, std::size_t m);

struct BoundCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

/// sum_{|p| <= M} ||S[p]f||^2 <= ||f||^2
BoundCheck check_nonexpansive(const Kernel& kernel, const Signal& f, std::size_t M);
/// sum_{|p| <= M} ||S[p]f - S[p]f'||^2 <= ||f - f'||^2
BoundCheck check_stability(const Kernel& kernel, const Signal& f, const Signal& f2, std::size_t M);
/// ||phi * (f - f')||^2 >= beta ||f - f'||^2, the depth-0 lower frame bound.
BoundCheck check_injectivity(const Kernel& kernel, const Signal& f, const Signal& f2);

struct EnergyPreservation {
  double energy = 0.0;    // ||f||^2
  double captured = 0.0;  // sum_{|p| <= M} ||S[p]f||^2
  double tail = 0.0;      // sum over layer M+1 of ||U[p]f||^2
  double tail_bound = 0.0;
  double identity_residual = 0.0;  // |energy - captured - tail|
  double alpha = 1.0;
  bool relaxed = false;
  /// Per layer: sum ||S[p]f||^2 against max|gamma_0|^2 alpha^m ||f||^2.
  std::vector<BoundCheck> layer_bounds;
  bool holds = false;
};

/// Uses beta_gamma when positive. Otherwise, when a subset S is given and
/// beta_gamma(S) > 0, the decay U_m <= alpha(S) U_{m-1} is applied from the
/// first layer whose input is nonnegative.
EnergyPreservation check_energy_preservation(const Kernel& kernel, const Signal& f, std::size_t M,
                                             std::optional<std::vector<std::size_t>> S = std::nullopt);

struct EquivarianceReport {
  double left = 0.0;   // max over paths of ||S[p]L_g f - L_g S[p]f||_inf
  double right = 0.0;  // same for R_g
  bool holds = false;
};

EquivarianceReport check_equivariance(const Kernel& kernel, const Signal& f, std::uint32_t g, std::size_t M);

struct InvarianceLayer {
  double lhs = 0.0;    // sum over layer m of ||S[p]L_g f - S[p]f||^2
  double bound = 0.0;  // 4 max|gamma_0|^2 alpha^m ||f||^2
  double lhs_right = 0.0;
  bool holds = false;
};

std::vector<InvarianceLayer> check_approx_invariance(const Kernel& kernel, const Signal& f, std::uint32_t g,
                                                     std::size_t M);

}  // namespace gscat
