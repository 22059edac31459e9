#pragma once

#include <cstddef>
#include <span>
#include <string_view>

#include "sdca/data.hpp"

namespace sdca {

enum class Loss { logistic, ridge };

std::string_view to_string(Loss loss);
Loss parse_loss(std::string_view name);

/// L2-regularized GLM objective.
///
/// The shared vector is kept in primal scaling w = (1/(lambda*n)) sum_i alpha_i x_i,
/// so the raw shared vector v = sum_i alpha_i x_i equals lambda*n*w and a
/// coordinate step delta adds delta/(lambda*n) * x_j to w.
///
///   logistic  P(w) = 1/n sum_i log(1 + exp(-y_i x_i.w)) + lambda/2 |w|^2
///             D(a) = 1/n sum_i H(y_i alpha_i) - lambda/2 |w|^2,  H = binary entropy
///   ridge     P(w) = 1/(2n) sum_i (x_i.w - y_i)^2 + lambda/2 |w|^2
///             D(a) = 1/n sum_i (y_i alpha_i - alpha_i^2 / 2) - lambda/2 |w|^2
struct Objective {
  Loss kind = Loss::logistic;
  double lambda = 1.0;

  void validate() const;
};

/// Everything one coordinate update reads.
struct CoordState {
  double alpha = 0.0;    ///< current dual coordinate alpha_j
  double label = 0.0;    ///< y_j
  double dot = 0.0;      ///< x_j . w
  double norm_sq = 0.0;  ///< |x_j|^2
  std::size_t n = 1;     ///< dataset example count
};

inline constexpr double kLogisticClamp = 1e-12;
inline constexpr double kLogisticTol = 1e-12;
inline constexpr int kLogisticMaxIter = 100;

/// Exact maximizer of the 1-D ridge dual: (y - dot - alpha) / (1 + |x|^2/(lambda n)).
double ridge_delta(const CoordState& s, const Objective& obj);

/// Maximizer of the 1-D logistic dual, found by safeguarded Newton on
/// a = y(alpha+delta) restricted to [kLogisticClamp, 1-kLogisticClamp].
/// Stops when |dD/da| <= tol or the bracket is narrower than 1e-14.
double logistic_delta(const CoordState& s, const Objective& obj, double tol = kLogisticTol,
                      int max_iter = kLogisticMaxIter);

/// Dispatches on obj.kind with default solver settings.
double coordinate_delta(const CoordState& s, const Objective& obj);

/// Per-example loss at margin z = x.w.
double example_loss(double z, double label, Loss kind);

double primal_value(std::span<const double> w, const Dataset& ds, const Objective& obj);
double dual_value(std::span<const double> alpha, std::span<const double> w, const Dataset& ds,
                  const Objective& obj);
double duality_gap(std::span<const double> alpha, std::span<const double> w, const Dataset& ds,
                   const Objective& obj);

/// Mean unregularized loss; logistic uses log-loss, ridge half squared error.
double mean_loss(std::span<const double> w, const Dataset& ds, Loss kind);

/// w = (1/(lambda n)) sum_i alpha_i x_i, recomputed from scratch.
std::vector<double> primal_from_dual(std::span<const double> alpha, const Dataset& ds,
                                     const Objective& obj);

}  // namespace sdca
