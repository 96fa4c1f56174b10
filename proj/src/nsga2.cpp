#include "adcprune/nsga2.hpp"

#include <cmath>
#include <stdexcept>

namespace adcprune {

bool dominates(const Objectives& a, const Objectives& b) {
  if (a.size() != b.size()) throw std::invalid_argument("objective vectors differ in length");
  bool strictly = false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k] > b[k]) return false;
    if (a[k] < b[k]) strictly = true;
  }
  return strictly;
}

std::vector<std::vector<std::size_t>> fast_non_dominated_sort(std::span<const Objectives> points) {
  const std::size_t n = points.size();
  std::vector<std::vector<std::size_t>> dominated_by_me(n);
  std::vector<int> domination_count(n, 0);
  std::vector<std::vector<std::size_t>> fronts;
  if (n == 0) return fronts;

  std::vector<std::size_t> current;
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t q = p + 1; q < n; ++q) {
      if (dominates(points[p], points[q])) {
        dominated_by_me[p].push_back(q);
        ++domination_count[q];
      } else if (dominates(points[q], points[p])) {
        dominated_by_me[q].push_back(p);
        ++domination_count[p];
      }
    }
  }
  for (std::size_t p = 0; p < n; ++p) {
    if (domination_count[p] == 0) current.push_back(p);
  }
  while (!current.empty()) {
    std::vector<std::size_t> next;
    for (std::size_t p : current) {
      for (std::size_t q : dominated_by_me[p]) {
        if (--domination_count[q] == 0) next.push_back(q);
      }
    }
    std::sort(next.begin(), next.end());
    fronts.push_back(std::move(current));
    current = std::move(next);
  }
  return fronts;
}

std::vector<double> crowding_distance(std::span<const Objectives> points,
                                      std::span<const std::size_t> front) {
  const std::size_t n = front.size();
  if (n == 0) throw std::invalid_argument("crowding distance of an empty front");
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(n, 0.0);
  if (n <= 2) {
    std::fill(dist.begin(), dist.end(), kInf);
    return dist;
  }
  const std::size_t m = points[front[0]].size();
  std::vector<std::size_t> order(n);
  for (std::size_t k = 0; k < m; ++k) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return points[front[a]][k] < points[front[b]][k];
    });
    const double lo = points[front[order.front()]][k];
    const double hi = points[front[order.back()]][k];
    dist[order.front()] = kInf;
    dist[order.back()] = kInf;
    const double range = hi - lo;
    if (!(range > 0.0) || !std::isfinite(range)) continue;
    for (std::size_t r = 1; r + 1 < n; ++r) {
      const double gap = points[front[order[r + 1]]][k] - points[front[order[r - 1]]][k];
      dist[order[r]] += gap / range;
    }
  }
  return dist;
}

double hypervolume_2d(std::span<const Objectives> points, std::array<double, 2> reference) {
  std::vector<std::pair<double, double>> inside;
  for (const auto& p : points) {
    if (p.size() != 2) throw std::invalid_argument("hypervolume_2d needs 2 objectives");
    if (p[0] < reference[0] && p[1] < reference[1]) inside.emplace_back(p[0], p[1]);
  }
  std::sort(inside.begin(), inside.end());
  // Staircase of points that improve f2 while sweeping f1 upwards.
  std::vector<std::pair<double, double>> stairs;
  double best = reference[1];
  for (const auto& p : inside) {
    if (p.second < best) {
      stairs.push_back(p);
      best = p.second;
    }
  }
  double volume = 0.0;
  for (std::size_t i = 0; i < stairs.size(); ++i) {
    const double next_f1 = i + 1 < stairs.size() ? stairs[i + 1].first : reference[0];
    volume += (next_f1 - stairs[i].first) * (reference[1] - stairs[i].second);
  }
  return volume;
}

void GaParams::validate() const {
  if (population < 4 || population % 2 != 0) {
    throw std::invalid_argument("population must be even and >= 4");
  }
  if (generations < 0) throw std::invalid_argument("generations must be >= 0");
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!prob(crossover_prob) || !prob(mutation_prob)) {
    throw std::invalid_argument("crossover and mutation probabilities must lie in [0, 1]");
  }
  if (workers < 0) throw std::invalid_argument("workers must be >= 0");
}

}  // namespace adcprune
