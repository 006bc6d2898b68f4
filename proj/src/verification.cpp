#include "mfe/verification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mfe/errors.hpp"
#include "mfe/rvi.hpp"

namespace mfe {

KolmogorovCoefficients kolmogorov_coefficients(double a) {
  if (!(a > 0.0 && a < 1.0)) throw ParameterError("action must lie in (0, 1)");
  const double b = 1.0 - a;
  const double den = 1.0 - a * b;
  return {(a * a * a + b * b * b) / den, (a * b * b - a * a) / den, (b * a * a - b * b) / den};
}

std::array<double, 2> example_steady_state(double a) {
  const double b = 1.0 - a;
  const double den = 1.0 - a * b;
  return {b * b / den, a * a / den};
}

double kolmogorov_operator(double a, const ReducedFunction& v, double mu1, double mu3) {
  const double b = 1.0 - a;
  return b * b * (1.0 - mu3) + a * a * (1.0 - mu1) + v(b * (1.0 - mu3), a * (1.0 - mu1));
}

AnalyticEigenvector::AnalyticEigenvector(double a0, double lambda) : a0_(a0), lambda_(lambda) {
  if (!(a0 > 0.0 && a0 < 0.5)) throw ParameterError("a0 must lie in (0, 1/2)");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ParameterError("lambda must lie in [0, 1]");
  actions_ = {a0, 1.0 - a0};
  for (int k = 0; k < 2; ++k) {
    coef_[k] = kolmogorov_coefficients(actions_[k]);
    steady_[k] = example_steady_state(actions_[k]);
  }
  gain_ = coef_[0].gain;
}

double AnalyticEigenvector::centered(int i, int j, double mu1, double mu3) const {
  const auto& c = coef_[j];
  return c.alpha * (mu1 - steady_[i][0]) + c.beta * (mu3 - steady_[i][1]);
}

double AnalyticEigenvector::piece(int k, int j, double mu1, double mu3) const {
  if (j < 2) return centered(k, j, mu1, mu3);
  // B^k applied to the cross bias h-hat^{k,1-k}; this term dominates
  // B^{1-k} h-hat^{kk} by a positive constant.
  const ReducedFunction cross = [this, k](double x, double y) { return centered(k, 1 - k, x, y); };
  return kolmogorov_operator(actions_[k], cross, mu1, mu3) - gain_;
}

double AnalyticEigenvector::base(int k, double mu1, double mu3) const {
  return std::max({piece(k, 0, mu1, mu3), piece(k, 1, mu1, mu3), piece(k, 2, mu1, mu3)});
}

double AnalyticEigenvector::operator()(double mu1, double mu3) const {
  if (lambda_ == 0.0) return base(0, mu1, mu3);
  if (lambda_ == 1.0) return base(1, mu1, mu3);
  return std::max(base(0, mu1, mu3) - lambda_ / (1.0 - lambda_), base(1, mu1, mu3) - (1.0 - lambda_) / lambda_);
}

std::vector<std::array<double, 2>> invariant_region(double a0) {
  if (!(a0 > 0.0 && a0 < 0.5)) throw ParameterError("a0 must lie in (0, 1/2)");
  std::vector<std::array<double, 2>> pts;
  for (double a : {a0, 1.0 - a0}) {
    // rows of P(a) in (mu_1, mu_3) coordinates
    pts.push_back({1.0 - a, 0.0});
    pts.push_back({1.0 - a, a});
    pts.push_back({0.0, a});
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  auto cross = [](const std::array<double, 2>& o, const std::array<double, 2>& p, const std::array<double, 2>& q) {
    return (p[0] - o[0]) * (q[1] - o[1]) - (p[1] - o[1]) * (q[0] - o[0]);
  };
  // Andrew's monotone chain
  std::vector<std::array<double, 2>> hull(2 * pts.size());
  std::size_t h = 0;
  for (const auto& p : pts) {
    while (h >= 2 && cross(hull[h - 2], hull[h - 1], p) <= 0.0) --h;
    hull[h++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = h + 1; i-- > 0;) {
    while (h >= lower && cross(hull[h - 2], hull[h - 1], pts[i]) <= 0.0) --h;
    hull[h++] = pts[i];
  }
  hull.resize(h - 1);
  return hull;
}

bool in_invariant_region(std::span<const std::array<double, 2>> hull, double mu1, double mu3, double tol) {
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const auto& p = hull[i];
    const auto& q = hull[(i + 1) % hull.size()];
    const double c = (q[0] - p[0]) * (mu3 - p[1]) - (q[1] - p[1]) * (mu1 - p[0]);
    if (c < -tol) return false;
  }
  return true;
}

std::vector<Point> invariant_region_sample(double a0, int resolution) {
  if (resolution < 1) throw ParameterError("resolution must be >= 1");
  const auto hull = invariant_region(a0);
  std::vector<Point> out;
  for (const auto& c : hull) out.push_back({c[0], 1.0 - c[0] - c[1], c[1]});
  for (int i = 0; i <= resolution; ++i)
    for (int j = 0; i + j <= resolution; ++j) {
      const double x = static_cast<double>(i) / resolution;
      const double y = static_cast<double>(j) / resolution;
      if (in_invariant_region(hull, x, y)) out.push_back({x, std::max(0.0, 1.0 - x - y), y});
    }
  return out;
}

double eigen_residual(const MeanFieldModel& model, const std::function<double(std::span<const double>)>& h,
                      double g, std::span<const Point> points) {
  double worst = 0.0;
  for (const auto& mu : points) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < model.action_count(); ++a) {
      const Point next = model.push_forward(a, mu);
      best = std::max(best, model.reward(a, next) + h(next));
    }
    worst = std::max(worst, std::abs(best - h(mu) - g));
  }
  return worst;
}

double eigen_residual(const MeanFieldModel& model, const SimplexGrid& grid, std::span<const double> h, double g,
                      int threads) {
  const GridBellman bellman(model, grid, threads);
  std::vector<double> out(bellman.size());
  bellman.apply(h, out);
  double worst = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) worst = std::max(worst, std::abs(out[i] - h[i] - g));
  return worst;
}

}  // namespace mfe
