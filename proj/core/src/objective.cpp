#include "sdca/objective.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sdca {

std::string_view to_string(Loss loss) {
  return loss == Loss::logistic ? "logistic" : "ridge";
}

Loss parse_loss(std::string_view name) {
  if (name == "logistic") return Loss::logistic;
  if (name == "ridge") return Loss::ridge;
  throw std::invalid_argument("unknown objective '" + std::string(name) + "'");
}

void Objective::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("objective: lambda must be a positive finite number");
  }
}

double ridge_delta(const CoordState& s, const Objective& obj) {
  const double q = s.norm_sq / (obj.lambda * static_cast<double>(s.n));
  return (s.label - s.dot - s.alpha) / (1.0 + q);
}

double logistic_delta(const CoordState& s, const Objective& obj, double tol, int max_iter) {
  if (!std::isfinite(s.alpha) || !std::isfinite(s.dot) || !std::isfinite(s.norm_sq)) {
    throw std::invalid_argument("logistic_delta: non-finite coordinate state");
  }
  if (s.label != 1.0 && s.label != -1.0) {
    throw std::invalid_argument("logistic_delta: label must be -1 or +1");
  }
  const double y = s.label;
  const double q = s.norm_sq / (obj.lambda * static_cast<double>(s.n));
  const double a_start = y * s.alpha;
  const double y_dot = y * s.dot;

  // Derivative of the (n-scaled) 1-D dual with respect to a = y(alpha + delta).
  // Strictly decreasing on (0, 1), from +inf to -inf.
  auto grad = [&](double a) { return std::log1p(-a) - std::log(a) - y_dot - (a - a_start) * q; };

  double lo = kLogisticClamp;
  double hi = 1.0 - kLogisticClamp;
  if (grad(lo) <= 0.0) return y * lo - s.alpha;
  if (grad(hi) >= 0.0) return y * hi - s.alpha;

  double a = std::clamp(a_start, lo, hi);
  for (int it = 0; it < max_iter; ++it) {
    const double g = grad(a);
    if (std::abs(g) <= tol) break;
    if (g > 0.0) {
      lo = a;
    } else {
      hi = a;
    }
    if (hi - lo < 1e-14) break;
    const double curvature = -1.0 / (a * (1.0 - a)) - q;
    double next = a - g / curvature;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    a = next;
  }
  return y * a - s.alpha;
}

double coordinate_delta(const CoordState& s, const Objective& obj) {
  return obj.kind == Loss::ridge ? ridge_delta(s, obj) : logistic_delta(s, obj);
}

double example_loss(double z, double label, Loss kind) {
  if (kind == Loss::ridge) {
    const double r = z - label;
    return 0.5 * r * r;
  }
  const double m = label * z;
  return m > 0.0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m));
}

namespace {

void check_dims(std::span<const double> w, const Dataset& ds) {
  if (w.size() != ds.d()) {
    throw std::invalid_argument("model has " + std::to_string(w.size()) +
                                " features but dataset has d=" + std::to_string(ds.d()));
  }
}

double squared_norm(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return acc;
}

double entropy(double a) {
  double h = 0.0;
  if (a > 0.0) h -= a * std::log(a);
  if (a < 1.0) h -= (1.0 - a) * std::log1p(-a);
  return h;
}

}  // namespace

double mean_loss(std::span<const double> w, const Dataset& ds, Loss kind) {
  check_dims(w, ds);
  if (ds.n() == 0) throw std::invalid_argument("mean_loss: empty dataset");
  double acc = 0.0;
  for (std::size_t j = 0; j < ds.n(); ++j) {
    acc += example_loss(dot(ds.example(j), w), ds.label(j), kind);
  }
  return acc / static_cast<double>(ds.n());
}

double primal_value(std::span<const double> w, const Dataset& ds, const Objective& obj) {
  return mean_loss(w, ds, obj.kind) + 0.5 * obj.lambda * squared_norm(w);
}

double dual_value(std::span<const double> alpha, std::span<const double> w, const Dataset& ds,
                  const Objective& obj) {
  check_dims(w, ds);
  if (alpha.size() != ds.n()) {
    throw std::invalid_argument("dual_value: alpha has " + std::to_string(alpha.size()) +
                                " entries, dataset has n=" + std::to_string(ds.n()));
  }
  if (ds.n() == 0) throw std::invalid_argument("dual_value: empty dataset");
  double acc = 0.0;
  for (std::size_t j = 0; j < ds.n(); ++j) {
    const double y = ds.label(j);
    if (obj.kind == Loss::ridge) {
      acc += y * alpha[j] - 0.5 * alpha[j] * alpha[j];
    } else {
      const double a = y * alpha[j];
      if (!(a >= -1e-12 && a <= 1.0 + 1e-12)) {
        throw std::invalid_argument("dual_value: logistic coordinate " + std::to_string(j) +
                                    " infeasible (y*alpha = " + std::to_string(a) + ")");
      }
      acc += entropy(std::clamp(a, 0.0, 1.0));
    }
  }
  return acc / static_cast<double>(ds.n()) - 0.5 * obj.lambda * squared_norm(w);
}

double duality_gap(std::span<const double> alpha, std::span<const double> w, const Dataset& ds,
                   const Objective& obj) {
  return primal_value(w, ds, obj) - dual_value(alpha, w, ds, obj);
}

std::vector<double> primal_from_dual(std::span<const double> alpha, const Dataset& ds,
                                     const Objective& obj) {
  if (alpha.size() != ds.n()) throw std::invalid_argument("primal_from_dual: size mismatch");
  std::vector<double> w(ds.d(), 0.0);
  const double scale = 1.0 / (obj.lambda * static_cast<double>(ds.n()));
  for (std::size_t j = 0; j < ds.n(); ++j) {
    if (alpha[j] != 0.0) axpy(alpha[j] * scale, ds.example(j), w);
  }
  return w;
}

}  // namespace sdca
