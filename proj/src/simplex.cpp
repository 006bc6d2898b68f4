#include "mfe/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mfe/errors.hpp"

namespace mfe {

namespace {

constexpr double kLatticeTol = 1e-9;

void enumerate(int pos, int remaining, std::vector<int>& current, std::vector<int>& out) {
  const int n = static_cast<int>(current.size());
  if (pos == n - 1) {
    current[pos] = remaining;
    out.insert(out.end(), current.begin(), current.end());
    return;
  }
  for (int v = 0; v <= remaining; ++v) {
    current[pos] = v;
    enumerate(pos + 1, remaining - v, current, out);
  }
}

}  // namespace

std::uint64_t SimplexGrid::composition_count(int parts, int total) {
  if (parts <= 0) return total == 0 ? 1 : 0;
  if (total < 0) return 0;
  // binomial(total + parts - 1, parts - 1)
  const std::uint64_t n = static_cast<std::uint64_t>(total) + parts - 1;
  std::uint64_t k = static_cast<std::uint64_t>(parts) - 1;
  k = std::min(k, n - k);
  long double r = 1.0L;
  std::uint64_t exact = 1;
  bool overflow = false;
  for (std::uint64_t i = 1; i <= k; ++i) {
    r = r * static_cast<long double>(n - k + i) / static_cast<long double>(i);
    const std::uint64_t num = n - k + i;
    if (!overflow) {
      if (exact > std::numeric_limits<std::uint64_t>::max() / num) {
        overflow = true;
      } else {
        exact = exact * num / i;  // exact: product of i consecutive integers divisible by i!
      }
    }
  }
  if (overflow) {
    if (r > static_cast<long double>(std::numeric_limits<std::uint64_t>::max()))
      return std::numeric_limits<std::uint64_t>::max();
    return static_cast<std::uint64_t>(std::llround(static_cast<double>(r)));
  }
  return exact;
}

SimplexGrid::SimplexGrid(int states, int resolution) : states_(states), resolution_(resolution) {
  if (states < 2) throw ParameterError("simplex grid needs at least 2 states");
  if (resolution < 1) throw ParameterError("simplex grid resolution must be >= 1");
  const std::uint64_t m = composition_count(states, resolution);
  if (m > (std::uint64_t{1} << 31)) throw ParameterError("simplex grid too large");
  size_ = static_cast<std::size_t>(m);

  counts_.assign(static_cast<std::size_t>(states + 2) * (resolution + 1), 0);
  for (int p = 0; p <= states + 1; ++p)
    for (int t = 0; t <= resolution; ++t)
      counts_[static_cast<std::size_t>(p) * (resolution + 1) + t] = composition_count(p, t);

  compositions_.reserve(size_ * states_);
  std::vector<int> current(states_, 0);
  enumerate(0, resolution_, current, compositions_);

  points_.resize(compositions_.size());
  const double inv = 1.0 / resolution_;
  std::transform(compositions_.begin(), compositions_.end(), points_.begin(),
                 [inv](int c) { return c * inv; });
}

std::uint64_t SimplexGrid::count(int parts, int total) const {
  if (total < 0) return 0;
  return counts_[static_cast<std::size_t>(parts) * (resolution_ + 1) + total];
}

std::size_t SimplexGrid::index_of(std::span<const int> c) const {
  if (c.size() != static_cast<std::size_t>(states_))
    throw ParameterError("composition has wrong length");
  int remaining = resolution_;
  std::uint64_t idx = 0;
  for (int i = 0; i + 1 < states_; ++i) {
    if (c[i] < 0 || c[i] > remaining) throw ParameterError("invalid composition");
    const int parts = states_ - i - 1;
    // compositions of the tail with a smaller value at position i
    idx += count(parts + 1, remaining) - count(parts + 1, remaining - c[i]);
    remaining -= c[i];
  }
  if (c[states_ - 1] != remaining) throw ParameterError("composition does not sum to D");
  return static_cast<std::size_t>(idx);
}

std::size_t SimplexGrid::interpolate_into(std::span<const double> mu,
                                          std::span<std::size_t> vertices,
                                          std::span<double> weights) const {
  const Point p = project_to_simplex(mu);
  const int n = states_;
  const double d = resolution_;

  // Cumulative coordinates y_i = D * sum_{j >= i} mu_j, i = 1..N-1.
  std::vector<double> y(n - 1);
  double acc = 0.0;
  for (int i = n - 1; i >= 1; --i) {
    acc += d * p[i];
    double v = std::clamp(acc, 0.0, d);
    const double r = std::round(v);
    if (std::abs(v - r) <= kLatticeTol) v = r;
    y[i - 1] = v;
  }
  for (int i = 1; i + 1 < n; ++i) y[i] = std::min(y[i], y[i - 1]);

  std::vector<int> base(n - 1);
  std::vector<double> frac(n - 1);
  for (int i = 0; i < n - 1; ++i) {
    base[i] = static_cast<int>(std::floor(y[i]));
    frac[i] = y[i] - base[i];
  }
  std::vector<int> order(n - 1);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return frac[a] > frac[b]; });

  std::vector<int> vertex = base;
  std::vector<int> comp(n);
  auto emit = [&](double w, std::size_t slot) {
    comp[0] = resolution_ - vertex[0];
    for (int i = 1; i + 1 < n; ++i) comp[i] = vertex[i - 1] - vertex[i];
    comp[n - 1] = vertex[n - 2];
    vertices[slot] = index_of(comp);
    weights[slot] = w;
  };

  std::size_t written = 0;
  const double first = 1.0 - (n > 1 ? frac[order[0]] : 0.0);
  if (first > 0.0) emit(first, written++);
  for (int k = 0; k < n - 1; ++k) {
    vertex[order[k]] += 1;
    const double next = (k + 1 < n - 1) ? frac[order[k + 1]] : 0.0;
    const double w = frac[order[k]] - next;
    if (w > 0.0) emit(w, written++);
  }
  return written;
}

Interpolant SimplexGrid::interpolate(std::span<const double> mu) const {
  std::vector<std::size_t> v(states_);
  std::vector<double> w(states_);
  const std::size_t n = interpolate_into(mu, v, w);
  v.resize(n);
  w.resize(n);
  return {std::move(v), std::move(w)};
}

std::size_t SimplexGrid::nearest_index(std::span<const double> mu) const {
  const Point p = project_to_simplex(mu);
  std::vector<double> x(p.size());
  std::transform(p.begin(), p.end(), x.begin(), [this](double v) { return v * resolution_; });
  return nearest_index_scaled(x);
}

std::size_t SimplexGrid::nearest_index_scaled(std::span<const double> x) const {
  const int n = states_;
  const int d = resolution_;
  // The optimal sup distance is < 1 lattice unit, hence one of {0, f_i, 1 - f_i}.
  std::vector<double> candidates{0.0};
  for (double xi : x) {
    const double f = xi - std::floor(xi);
    candidates.push_back(f);
    candidates.push_back(1.0 - f);
  }
  std::sort(candidates.begin(), candidates.end());

  std::vector<int> lo(n), hi(n);
  for (double t : candidates) {
    long sum_lo = 0, sum_hi = 0;
    bool ok = true;
    for (int i = 0; i < n; ++i) {
      lo[i] = std::max(0, static_cast<int>(std::ceil(x[i] - t - kLatticeTol)));
      hi[i] = std::min(d, static_cast<int>(std::floor(x[i] + t + kLatticeTol)));
      if (lo[i] > hi[i]) {
        ok = false;
        break;
      }
      sum_lo += lo[i];
      sum_hi += hi[i];
    }
    if (!ok || sum_lo > d || sum_hi < d) continue;

    // Lexicographically smallest composition inside the box == smallest index.
    std::vector<long> tail_hi(n + 1, 0);
    for (int i = n - 1; i >= 0; --i) tail_hi[i] = tail_hi[i + 1] + hi[i];
    std::vector<int> c(n);
    long remaining = d;
    for (int i = 0; i < n; ++i) {
      const long need = remaining - tail_hi[i + 1];
      c[i] = static_cast<int>(std::max<long>(lo[i], need));
      remaining -= c[i];
    }
    return index_of(c);
  }
  // Unreachable: t = max(f, 1 - f) always admits a rounding.
  throw DomainError("nearest_index: no lattice point found");
}

ProductGrid::ProductGrid(const SimplexGrid& local, int clusters)
    : local_(&local), clusters_(clusters) {
  if (clusters < 1) throw ParameterError("product grid needs at least one cluster");
  strides_.assign(clusters, 1);
  std::size_t size = 1;
  for (int k = clusters - 1; k >= 0; --k) {
    strides_[k] = size;
    if (size > std::numeric_limits<std::size_t>::max() / local.size())
      throw ParameterError("product grid too large");
    size *= local.size();
  }
  size_ = size;
}

void ProductGrid::decode(std::size_t node, std::span<std::size_t> local) const {
  for (int k = 0; k < clusters_; ++k) local[k] = local_index(node, k);
}

std::size_t ProductGrid::encode(std::span<const std::size_t> local) const {
  std::size_t node = 0;
  for (int k = 0; k < clusters_; ++k) node += local[k] * strides_[k];
  return node;
}

Point ProductGrid::point(std::size_t node) const {
  Point out;
  out.reserve(static_cast<std::size_t>(clusters_) * local_->states());
  for (int k = 0; k < clusters_; ++k) {
    const auto p = local_->point(local_index(node, k));
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

Point project_to_simplex(std::span<const double> mu, double tol) {
  if (mu.size() < 2) throw DomainError("point must have at least 2 coordinates");
  double sum = 0.0;
  for (double v : mu) {
    if (!std::isfinite(v) || v < -tol) throw DomainError("point has a negative coordinate");
    sum += v;
  }
  if (std::abs(sum - 1.0) > tol) throw DomainError("point coordinates do not sum to 1");
  Point out(mu.begin(), mu.end());
  double clipped = 0.0;
  for (double& v : out) {
    v = std::max(v, 0.0);
    clipped += v;
  }
  for (double& v : out) v /= clipped;
  return out;
}

double hilbert_distance(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size() || u.empty()) throw ParameterError("hilbert_distance: size mismatch");
  double hi = -std::numeric_limits<double>::infinity();
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!(u[i] > 0.0) || !(v[i] > 0.0))
      throw DomainError("hilbert_distance requires positive entries");
    const double r = std::log(u[i]) - std::log(v[i]);
    hi = std::max(hi, r);
    lo = std::min(lo, r);
  }
  return hi - lo;
}

double hilbert_diameter(const Matrix& p) {
  double diam = 0.0;
  for (std::size_t i = 0; i < p.rows(); ++i)
    for (std::size_t j = i + 1; j < p.rows(); ++j)
      diam = std::max(diam, hilbert_distance(p.row(i), p.row(j)));
  if (p.rows() == 1) hilbert_distance(p.row(0), p.row(0));  // positivity check
  return diam;
}

double contraction_coefficient(const Matrix& p) { return std::tanh(hilbert_diameter(p) / 4.0); }

double metric_comparison_factor(double diameter) {
  if (diameter < 0.0) throw DomainError("diameter must be nonnegative");
  if (diameter < 1e-12) return 1.0 + 1.5 * diameter;
  return std::exp(diameter) * std::expm1(diameter) / diameter;
}

}  // namespace mfe
