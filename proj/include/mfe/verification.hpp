#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "mfe/model.hpp"
#include "mfe/simplex.hpp"

namespace mfe {

/// Linear bias h(mu_1, mu_3) = alpha mu_1 + beta mu_3 and gain of the constant
/// action a in the three-state example.
struct KolmogorovCoefficients {
  double gain = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
};

KolmogorovCoefficients kolmogorov_coefficients(double a);

/// Stationary (mu_1, mu_3) of P(a) in the three-state example.
std::array<double, 2> example_steady_state(double a);

using ReducedFunction = std::function<double(double mu1, double mu3)>;

/// Constant-action operator
/// (B^a v)(x, y) = (1-a)^2 (1-y) + a^2 (1-x) + v((1-a)(1-y), a(1-x)).
double kolmogorov_operator(double a, const ReducedFunction& v, double mu1, double mu3);

/// Piecewise-linear eigenvector v^lambda of the three-state example with
/// actions {a0, 1 - a0}; lambda = 0 and 1 give v^0 and v^1.
class AnalyticEigenvector {
 public:
  AnalyticEigenvector(double a0, double lambda);

  double a0() const { return a0_; }
  double lambda() const { return lambda_; }
  double gain() const { return gain_; }

  double operator()(double mu1, double mu3) const;
  double operator()(std::span<const double> mu) const { return (*this)(mu[0], mu[2]); }

  /// v^k, k in {0, 1}.
  double base(int k, double mu1, double mu3) const;
  /// h-hat^{kj} = h^j - h^j(mu_hat^k) for j in {0, 1}; j = 2 is
  /// B^{a_k} h-hat^{k,1-k} - g.
  double piece(int k, int j, double mu1, double mu3) const;

 private:
  double centered(int i, int j, double mu1, double mu3) const;

  double a0_;
  double lambda_;
  double gain_;
  std::array<double, 2> actions_;
  std::array<KolmogorovCoefficients, 2> coef_;
  std::array<std::array<double, 2>, 2> steady_;
};

/// Convex hull of {e_i P(a) : i = 1..3, a in {a0, 1 - a0}} in (mu_1, mu_3)
/// coordinates, counter-clockwise.
std::vector<std::array<double, 2>> invariant_region(double a0);

bool in_invariant_region(std::span<const std::array<double, 2>> hull, double mu1, double mu3, double tol = 1e-12);

/// Lattice points of step 1/resolution inside the region, plus its corners,
/// as full 3-state points.
std::vector<Point> invariant_region_sample(double a0, int resolution);

/// max_x |max_a [r(a, x P(a)) + h(x P(a))] - h(x) - g| over the given points,
/// evaluating h exactly at the pushed-forward state.
double eigen_residual(const MeanFieldModel& model, const std::function<double(std::span<const double>)>& h,
                      double g, std::span<const Point> points);

/// Same residual on grid nodes for a bias array, with the grid operator.
double eigen_residual(const MeanFieldModel& model, const SimplexGrid& grid, std::span<const double> h, double g,
                      int threads = 0);

}  // namespace mfe
