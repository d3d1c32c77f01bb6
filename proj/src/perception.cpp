// src/perception.cpp

#include "forager/perception.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "forager/error.hpp"

namespace forager {

namespace {

constexpr double kCellVariance = 1.0 / 12.0;  // variance of a uniform unit interval
constexpr double kBumpCutoff = 4.0;           // bumps are truncated at 4 sigma

Vec2 centre(int x, int y) { return {x + 0.5, y + 0.5}; }

void normalize_or_throw(Grid<double>& g, const char* what) {
  double total = 0.0;
  for (double v : g.values()) total += v;
  if (!(total > 0.0) || !std::isfinite(total)) throw DegenerateError(std::string("degenerate priority map: ") + what);
  for (double& v : g.values()) v /= total;
}

void check_field(const Grid<double>& g, const char* name) {
  for (double v : g.values())
    if (!std::isfinite(v) || v < 0.0) throw DomainError(std::string("feature field '") + name + "' must be finite and nonnegative");
}

void add_bump(Grid<double>& g, Vec2 c, double sigma, double height) {
  const double reach = kBumpCutoff * sigma;
  const int x0 = std::max(0, static_cast<int>(std::floor(c.x - reach)));
  const int x1 = std::min(g.width() - 1, static_cast<int>(std::ceil(c.x + reach)));
  const int y0 = std::max(0, static_cast<int>(std::floor(c.y - reach)));
  const int y1 = std::min(g.height() - 1, static_cast<int>(std::ceil(c.y + reach)));
  if (x0 > x1 || y0 > y1) return;
  const double inv = 1.0 / (2.0 * sigma * sigma);
  // The Gaussian is separable: one exp per column and per row.
  thread_local std::vector<double> ex, ey;
  ex.resize(static_cast<std::size_t>(x1 - x0 + 1));
  ey.resize(static_cast<std::size_t>(y1 - y0 + 1));
  for (int x = x0; x <= x1; ++x) {
    const double d = x + 0.5 - c.x;
    ex[static_cast<std::size_t>(x - x0)] = std::exp(-d * d * inv);
  }
  for (int y = y0; y <= y1; ++y) {
    const double d = y + 0.5 - c.y;
    ey[static_cast<std::size_t>(y - y0)] = height * std::exp(-d * d * inv);
  }
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      const double d2 = (centre(x, y) - c).norm2();
      if (d2 <= reach * reach) g(x, y) += ey[static_cast<std::size_t>(y - y0)] * ex[static_cast<std::size_t>(x - x0)];
    }
}

}  // namespace

double foa_radius_for(int width, int height) {
  return std::max(1.0, std::floor(std::min(width, height) / 8.0));
}

PriorityMap uniform_priority(int width, int height, int tick, int stream, PerceptionMode mode) {
  PriorityMap m{Grid<double>(width, height, 1.0 / (static_cast<double>(width) * height)), tick, stream, mode};
  return m;
}

PriorityMap priority_posterior(const FeatureField& f, PerceptionMode mode, std::optional<Vec2> foa,
                               const AttentionOptions& opt, int tick, int stream) {
  check_field(f.bottom_up, "bottom_up");
  PriorityMap out{f.bottom_up, tick, stream, mode};
  if (mode == PerceptionMode::preattentive) {
    normalize_or_throw(out.grid, "no bottom-up evidence");
    return out;
  }
  if (!foa) throw DomainError("attentive priority requires a focus of attention");
  for (const auto& lik : f.object_likelihood) {
    check_field(lik, "object_likelihood");
    if (lik.width() != f.bottom_up.width() || lik.height() != f.bottom_up.height())
      throw DomainError("object likelihood map size differs from bottom-up map");
  }
  const double r2 = opt.foa_radius * opt.foa_radius;
  const int w = out.grid.width();
  const int h = out.grid.height();
  std::vector<double> ex(static_cast<std::size_t>(w)), ey(static_cast<std::size_t>(h));
  for (int x = 0; x < w; ++x) {
    const double d = x + 0.5 - foa->x;
    ex[static_cast<std::size_t>(x)] = std::exp(-d * d / (2.0 * r2));
  }
  for (int y = 0; y < h; ++y) {
    const double d = y + 0.5 - foa->y;
    ey[static_cast<std::size_t>(y)] = std::exp(-d * d / (2.0 * r2));
  }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double object = opt.likelihood_floor;
      for (int c = 0; c < kObjectKindCount; ++c)
        object += opt.task_prior[static_cast<std::size_t>(c)] * f.object_likelihood[static_cast<std::size_t>(c)](x, y);
      const double d2 = (centre(x, y) - *foa).norm2();
      const double fovea = d2 <= r2 ? 1.0 : ex[static_cast<std::size_t>(x)] * ey[static_cast<std::size_t>(y)];
      out.grid(x, y) *= object * fovea;
    }
  normalize_or_throw(out.grid, "product of evidence vanished");
  return out;
}

double exceedance_threshold(std::span<const double> values, double quantile) {
  if (values.empty()) return 0.0;
  std::vector<double> v(values.begin(), values.end());
  const auto n = v.size();
  auto rank = static_cast<std::size_t>(std::ceil(quantile * static_cast<double>(n)));
  rank = std::clamp<std::size_t>(rank, 1, n);
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(rank - 1), v.end());
  return v[rank - 1];
}

std::vector<ProtoObject> extract_proto_objects(const PriorityMap& map, int max_protos) {
  const auto& g = map.grid;
  const double threshold = exceedance_threshold(g.values());
  const int w = g.width();
  const int h = g.height();

  std::vector<int> label(g.size(), -1);
  std::vector<ProtoObject> protos;
  std::vector<int> stack;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const auto start = g.index(x, y);
      if (label[start] >= 0 || !(g[start] > threshold)) continue;
      const int id = static_cast<int>(protos.size());
      ProtoObject p;
      p.id = id;
      label[start] = id;
      stack.assign(1, static_cast<int>(start));
      while (!stack.empty()) {
        const int cell = stack.back();
        stack.pop_back();
        p.mask.push_back(cell);
        const int cx = cell % w;
        const int cy = cell / w;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = cx + dx;
            const int ny = cy + dy;
            if ((dx == 0 && dy == 0) || !g.contains(nx, ny)) continue;
            const auto ni = g.index(nx, ny);
            if (label[ni] >= 0 || !(g[ni] > threshold)) continue;
            label[ni] = id;
            stack.push_back(static_cast<int>(ni));
          }
      }
      std::sort(p.mask.begin(), p.mask.end());
      protos.push_back(std::move(p));
    }

  for (auto& p : protos) {
    double mass = 0.0, mx = 0.0, my = 0.0;
    for (int cell : p.mask) {
      const double v = g[static_cast<std::size_t>(cell)];
      const Vec2 c = centre(cell % w, cell / w);
      mass += v;
      mx += v * c.x;
      my += v * c.y;
    }
    p.mass = mass;
    p.mu = {mx / mass, my / mass};
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (int cell : p.mask) {
      const double v = g[static_cast<std::size_t>(cell)];
      const Vec2 d = centre(cell % w, cell / w) - p.mu;
      sxx += v * d.x * d.x;
      sxy += v * d.x * d.y;
      syy += v * d.y * d.y;
    }
    // Each cell is a unit square, so its own spread is added to the fit.
    p.sigma = {sxx / mass + kCellVariance, sxy / mass, syy / mass + kCellVariance};
    p.area = std::numbers::pi * std::sqrt(std::max(p.sigma.det(), 0.0));
  }

  std::stable_sort(protos.begin(), protos.end(),
                   [](const ProtoObject& a, const ProtoObject& b) { return a.mass > b.mass; });
  if (max_protos >= 0 && protos.size() > static_cast<std::size_t>(max_protos))
    protos.resize(static_cast<std::size_t>(max_protos));
  for (std::size_t i = 0; i < protos.size(); ++i) protos[i].id = static_cast<int>(i);
  return protos;
}

std::vector<int> interest_point_budget(std::span<const ProtoObject> protos, int n_samples) {
  double total = 0.0;
  for (const auto& p : protos) total += p.area;
  if (!(total > 0.0)) throw DegenerateError("proto-objects have zero total area");
  std::vector<int> out;
  out.reserve(protos.size());
  for (const auto& p : protos) {
    // The slack absorbs rounding in products that are integral in exact arithmetic.
    const double share = n_samples * (p.area / total);
    out.push_back(static_cast<int>(std::ceil(share - 1e-9)));
  }
  return out;
}

std::vector<ProtoObject> sample_interest_points(std::vector<ProtoObject> protos, int n_samples,
                                                const PriorityMap& map, Rng& rng) {
  if (protos.empty()) throw DomainError("interest point sampling needs at least one proto-object");
  if (n_samples < 1) throw DomainError("interest point budget must be >= 1");
  const auto budget = interest_point_budget(protos, n_samples);
  const int w = map.grid.width();
  const int h = map.grid.height();
  for (std::size_t i = 0; i < protos.size(); ++i) {
    auto& p = protos[i];
    const double a = std::sqrt(std::max(p.sigma.xx, 0.0));
    const double b = a > 0.0 ? p.sigma.xy / a : 0.0;
    const double c = std::sqrt(std::max(p.sigma.yy - b * b, 0.0));
    p.ips.clear();
    p.ips.reserve(static_cast<std::size_t>(budget[i]));
    for (int s = 0; s < budget[i]; ++s) {
      const double z1 = rng.normal();
      const double z2 = rng.normal();
      const Vec2 pos = clamp_to_frame({p.mu.x + a * z1, p.mu.y + b * z1 + c * z2}, w, h);
      p.ips.push_back({pos, map.grid(cell_of(pos.x, w), cell_of(pos.y, h)), p.id});
    }
  }
  return protos;
}

std::vector<InterestPoint> all_interest_points(std::span<const ProtoObject> protos) {
  std::vector<InterestPoint> out;
  for (const auto& p : protos) out.insert(out.end(), p.ips.begin(), p.ips.end());
  return out;
}

std::vector<VisibleObject> visible_objects(const Landscape& landscape, const ActivityIndex& index, int stream,
                                           int tick) {
  std::vector<VisibleObject> out;
  for (int i : index.on_stream(stream)) {
    const auto& a = landscape.activities[static_cast<std::size_t>(i)];
    if (!a.active_at(tick)) continue;
    for (const auto& o : a.objects) {
      const Cell c = o.positions[static_cast<std::size_t>(tick - a.t_start)];
      out.push_back({centre(c.x, c.y), o.extent, o.kind});
    }
  }
  return out;
}

Grid<double> synthesize_bottom_up(const Landscape& landscape, const ActivityIndex& index, int stream, int tick,
                                  const SensorConfig& sensor, Rng& rng) {
  Grid<double> g(landscape.width, landscape.height, sensor.floor);
  if (sensor.noise > 0.0)
    for (double& v : g.values()) v += sensor.noise * rng.uniform();
  for (const auto& o : visible_objects(landscape, index, stream, tick)) add_bump(g, o.pos, o.extent, sensor.amplitude);
  return g;
}

FeatureField synthesize_features(const Landscape& landscape, const ActivityIndex& index, int stream, int tick,
                                 const SensorConfig& sensor, Rng& rng) {
  const int w = landscape.width;
  const int h = landscape.height;
  FeatureField f{synthesize_bottom_up(landscape, index, stream, tick, sensor, rng),
                 {Grid<double>(w, h, 0.0), Grid<double>(w, h, 0.0)}};
  for (const auto& o : visible_objects(landscape, index, stream, tick)) {
    if (!rng.bernoulli(sensor.miss_rate))
      add_bump(f.object_likelihood[static_cast<std::size_t>(o.kind)], o.pos, o.extent, 1.0);
  }
  if (rng.bernoulli(sensor.false_alarm_rate)) {
    const Vec2 pos{rng.uniform(0.0, w), rng.uniform(0.0, h)};
    const auto kind = rng.index(kObjectKindCount);
    add_bump(f.object_likelihood[kind], pos, sensor.false_alarm_extent, 1.0);
  }
  return f;
}

}  // namespace forager
