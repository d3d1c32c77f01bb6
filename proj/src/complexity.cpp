#include "forager/complexity.hpp"

#include <algorithm>
#include <cmath>

#include "forager/error.hpp"

namespace forager {

void CellGrid::validate() const {
  if (n_rows < 1 || n_cols < 1 || count() < 2) throw ConfigError("cell grid needs N_w = rows * cols >= 2");
  if (width < n_cols || height < n_rows) throw ConfigError("cell grid is finer than the frame");
}

int CellGrid::cell_index(Vec2 p) const {
  const int col = std::clamp(static_cast<int>(std::floor(p.x * n_cols / width)), 0, n_cols - 1);
  const int row = std::clamp(static_cast<int>(std::floor(p.y * n_rows / height)), 0, n_rows - 1);
  return row * n_cols + col;
}

double spatial_entropy(std::span<const InterestPoint> ips, const CellGrid& grid) {
  if (ips.empty()) throw DomainError("spatial entropy undefined for an empty interest point set");
  std::vector<int> counts(static_cast<std::size_t>(grid.count()), 0);
  for (const auto& ip : ips) ++counts[static_cast<std::size_t>(grid.cell_index(ip.pos))];
  const double n = static_cast<double>(ips.size());
  double h = 0.0;
  for (int c : counts) {
    if (c == 0) continue;
    const double p = c / n;
    h -= p * std::log(p);
  }
  return std::max(h, 0.0);
}

ComplexityIndex complexity(std::span<const InterestPoint> ips, const CellGrid& grid, int stream, int tick) {
  ComplexityIndex ci;
  ci.stream = stream;
  ci.tick = tick;
  ci.H_sup = std::log(static_cast<double>(grid.count()));
  if (ips.empty()) return ci;
  ci.H = std::min(spatial_entropy(ips, grid), ci.H_sup);
  ci.delta = std::clamp(ci.H / ci.H_sup, 0.0, 1.0);
  ci.omega = 1.0 - ci.delta;
  ci.C = ci.delta * ci.omega;
  return ci;
}

StreamChoice stream_choice_distribution(std::span<const double> cs) {
  if (cs.empty()) throw DomainError("stream choice needs at least one stream");
  double total = 0.0;
  for (double c : cs) {
    if (!(c >= 0.0) || !std::isfinite(c)) throw DomainError("complexities must be finite and nonnegative");
    total += c;
  }
  StreamChoice out;
  if (!(total > 0.0)) {
    out.p.assign(cs.size(), 1.0 / static_cast<double>(cs.size()));
    out.fallback = true;
    return out;
  }
  out.p.reserve(cs.size());
  for (double c : cs) out.p.push_back(c / total);
  return out;
}

StreamChoice stream_choice_distribution(std::span<const ComplexityIndex> cs) {
  std::vector<double> values;
  values.reserve(cs.size());
  for (const auto& c : cs) values.push_back(c.C);
  return stream_choice_distribution(values);
}

int select_stream(std::span<const double> dist, Rng& rng) {
  if (dist.empty()) throw DomainError("empty stream distribution");
  double total = 0.0;
  for (double p : dist) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw DomainError("stream distribution has a negative or non-finite entry");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw DomainError("stream distribution does not sum to 1");
  const double u = rng.uniform() * total;
  double acc = 0.0;
  int last = -1;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (dist[i] <= 0.0) continue;
    last = static_cast<int>(i);
    acc += dist[i];
    if (u < acc) return last;
  }
  return last;
}

}  // namespace forager
