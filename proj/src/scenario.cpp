// src/scenario.cpp
//
// Landscape generation, validation, (de)serialization and the empirical
// activity joint distribution.

#include "forager/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "forager/error.hpp"
#include "forager/rng.hpp"

namespace forager {

using nlohmann::json;

std::string_view to_string(ObjectKind kind) {
  return kind == ObjectKind::face ? "face" : "body";
}

ObjectKind object_kind_from_string(std::string_view name) {
  if (name == "face") return ObjectKind::face;
  if (name == "body") return ObjectKind::body;
  throw ConfigError("unknown object kind '" + std::string(name) + "' (expected face or body)");
}

int Landscape::label_count() const {
  int max_label = -1;
  for (const auto& a : activities) max_label = std::max(max_label, a.label);
  return max_label + 1;
}

void validate(const Landscape& s) {
  auto fail = [](const std::string& msg) { throw ValidationError(msg); };
  if (s.K < 1) fail("invariant K >= 1 violated (K = " + std::to_string(s.K) + ")");
  if (s.width < 8 || s.height < 8)
    fail("invariant width, height >= 8 violated (" + std::to_string(s.width) + "x" + std::to_string(s.height) + ")");
  if (s.T_total < 1) fail("invariant T_total >= 1 violated");
  for (std::size_t i = 0; i < s.activities.size(); ++i) {
    const auto& a = s.activities[i];
    const std::string where = "activities[" + std::to_string(i) + "]: ";
    if (a.label < 0) fail(where + "invariant label >= 0 violated");
    if (a.stream < 0 || a.stream >= s.K) fail(where + "invariant 0 <= stream < K violated");
    if (a.t_start >= a.t_end) fail(where + "invariant t_start < t_end violated");
    if (a.t_start < 0 || a.t_end > s.T_total) fail(where + "invariant span within [0, T_total) violated");
    for (std::size_t j = 0; j < a.objects.size(); ++j) {
      const auto& o = a.objects[j];
      const std::string owhere = where + "objects[" + std::to_string(j) + "]: ";
      if (!(o.extent > 0.0) || !std::isfinite(o.extent)) fail(owhere + "invariant extent > 0 violated");
      if (o.positions.size() != static_cast<std::size_t>(a.duration()))
        fail(owhere + "invariant one position per tick of the parent span violated");
      for (const auto& c : o.positions)
        if (c.x < 0 || c.y < 0 || c.x >= s.width || c.y >= s.height)
          fail(owhere + "invariant positions inside the grid violated");
    }
  }
}

ActivityIndex::ActivityIndex(const Landscape& landscape)
    : landscape_(&landscape), by_stream_(static_cast<std::size_t>(std::max(landscape.K, 0))) {
  for (std::size_t i = 0; i < landscape.activities.size(); ++i) {
    const auto k = landscape.activities[i].stream;
    if (k >= 0 && k < landscape.K) by_stream_[static_cast<std::size_t>(k)].push_back(static_cast<int>(i));
  }
}

std::vector<int> ActivityIndex::active(int stream, int t) const {
  std::vector<int> out;
  for (int i : by_stream_[static_cast<std::size_t>(stream)])
    if (landscape_->activities[static_cast<std::size_t>(i)].active_at(t)) out.push_back(i);
  return out;
}

// ---------------------------------------------------------------------------
// Generation

void validate(const ScenarioConfig& c) {
  auto fail = [](const std::string& msg) { throw ConfigError("scenario config: " + msg); };
  if (c.K < 1) fail("K must be >= 1");
  if (c.width < 8 || c.height < 8) fail("width and height must be >= 8");
  if (c.T_total < 1) fail("T_total (duration) must be >= 1");
  if (c.activity_count < 0) fail("activity_count must be >= 0");
  if (c.class_rates.empty()) fail("at least one activity class is required");
  double rate_sum = 0.0;
  for (double r : c.class_rates) {
    if (!(r >= 0.0) || !std::isfinite(r)) fail("class rates must be finite and nonnegative");
    rate_sum += r;
  }
  if (!(rate_sum > 0.0)) fail("at least one class needs a nonzero rate");
  if (!c.stream_weights.empty()) {
    if (c.stream_weights.size() != static_cast<std::size_t>(c.K)) fail("stream_weights must have K entries");
    double w = 0.0;
    for (double x : c.stream_weights) {
      if (!(x >= 0.0) || !std::isfinite(x)) fail("stream weights must be finite and nonnegative");
      w += x;
    }
    if (!(w > 0.0)) fail("stream weights sum to zero");
  }
  if (!(c.mean_duration >= 1.0)) fail("mean_duration must be >= 1");
  if (!(c.duration_spread >= 0.0 && c.duration_spread < 1.0)) fail("duration_spread must be in [0, 1)");
  if (c.min_objects < 0 || c.max_objects < c.min_objects) fail("object count range is empty");
  if (!(c.min_extent > 0.0) || c.max_extent < c.min_extent) fail("extent range must be positive and nonempty");
  if (c.jitter < 0) fail("jitter must be >= 0");
  if (c.path_legs < 1) fail("path_legs must be >= 1");
}

namespace {

std::size_t draw_categorical(const std::vector<double>& weights, Rng& rng) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  const double u = rng.uniform() * total;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    last_positive = i;
    acc += weights[i];
    if (u < acc) return i;
  }
  return last_positive;
}

ObjectTrack make_track(const ScenarioConfig& c, int duration, Rng& rng) {
  ObjectTrack o;
  o.kind = rng.bernoulli(0.5) ? ObjectKind::face : ObjectKind::body;
  // Quarter-cell resolution keeps the serialized form short.
  o.extent = std::round(rng.uniform(c.min_extent, c.max_extent) * 4.0) / 4.0;
  o.extent = std::max(o.extent, 0.25);

  const double margin = std::min(o.extent, std::min(c.width, c.height) / 4.0);
  auto waypoint = [&] {
    return std::pair{rng.uniform(margin, c.width - 1 - margin), rng.uniform(margin, c.height - 1 - margin)};
  };
  std::vector<std::pair<double, double>> way;
  for (int i = 0; i <= c.path_legs; ++i) way.push_back(waypoint());

  o.positions.reserve(static_cast<std::size_t>(duration));
  for (int j = 0; j < duration; ++j) {
    const double s = duration > 1 ? static_cast<double>(j) / (duration - 1) * c.path_legs : 0.0;
    const int leg = std::min(static_cast<int>(s), c.path_legs - 1);
    const double f = s - leg;
    const auto [x0, y0] = way[static_cast<std::size_t>(leg)];
    const auto [x1, y1] = way[static_cast<std::size_t>(leg) + 1];
    int x = static_cast<int>(std::lround(x0 + f * (x1 - x0)));
    int y = static_cast<int>(std::lround(y0 + f * (y1 - y0)));
    if (c.jitter > 0) {
      const auto span = static_cast<std::size_t>(2 * c.jitter + 1);
      x += static_cast<int>(rng.index(span)) - c.jitter;
      y += static_cast<int>(rng.index(span)) - c.jitter;
    }
    o.positions.push_back({std::clamp(x, 0, c.width - 1), std::clamp(y, 0, c.height - 1)});
  }
  return o;
}

}  // namespace

Landscape generate_scenario(const ScenarioConfig& c, std::uint64_t seed) {
  validate(c);
  Rng rng(derive_seed(seed, 0x5CE0));
  std::vector<double> stream_weights = c.stream_weights;
  if (stream_weights.empty()) stream_weights.assign(static_cast<std::size_t>(c.K), 1.0);

  Landscape s;
  s.K = c.K;
  s.width = c.width;
  s.height = c.height;
  s.T_total = c.T_total;
  s.activities.reserve(static_cast<std::size_t>(c.activity_count));
  for (int i = 0; i < c.activity_count; ++i) {
    Activity a;
    a.label = static_cast<int>(draw_categorical(c.class_rates, rng));
    a.stream = static_cast<int>(draw_categorical(stream_weights, rng));
    const double raw = c.mean_duration * (1.0 + c.duration_spread * rng.uniform(-1.0, 1.0));
    const int duration = std::clamp(static_cast<int>(std::lround(raw)), 1, c.T_total);
    a.t_start = static_cast<int>(rng.index(static_cast<std::size_t>(c.T_total - duration + 1)));
    a.t_end = a.t_start + duration;
    const int n_obj = c.min_objects + static_cast<int>(rng.index(static_cast<std::size_t>(c.max_objects - c.min_objects + 1)));
    for (int j = 0; j < n_obj; ++j) a.objects.push_back(make_track(c, duration, rng));
    s.activities.push_back(std::move(a));
  }
  std::stable_sort(s.activities.begin(), s.activities.end(), [](const Activity& a, const Activity& b) {
    return std::tie(a.t_start, a.stream) < std::tie(b.t_start, b.stream);
  });
  return s;
}

std::vector<std::string> scenario_preset_names() { return {"ucr-like", "sparse", "crowded"}; }

ScenarioConfig scenario_preset(std::string_view name) {
  ScenarioConfig c;
  // Eleven imbalanced activity classes and uneven camera loads.
  c.class_rates = {0.20, 0.16, 0.13, 0.11, 0.09, 0.08, 0.07, 0.06, 0.04, 0.03, 0.03};
  c.stream_weights = {0.22, 0.10, 0.04, 0.12, 0.05, 0.20, 0.12, 0.15};
  if (name == "ucr-like") {
    // About 14 activities of ~500 ticks fall in the 7000-tick test window.
    c.activity_count = 16;
    return c;
  }
  if (name == "sparse") {
    c.activity_count = 8;
    return c;
  }
  if (name == "crowded") {
    c.activity_count = 60;
    c.max_objects = 5;
    return c;
  }
  throw ConfigError("unknown scenario preset '" + std::string(name) + "' (valid: ucr-like, sparse, crowded)");
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

json activity_to_json(const Activity& a) {
  json objects = json::array();
  for (const auto& o : a.objects) {
    json pos = json::array();
    for (const auto& c : o.positions) pos.push_back({c.x, c.y});
    objects.push_back(json{{"kind", to_string(o.kind)}, {"extent", o.extent}, {"positions", std::move(pos)}});
  }
  return json{{"label", a.label}, {"stream", a.stream}, {"t_start", a.t_start}, {"t_end", a.t_end},
              {"objects", std::move(objects)}};
}

int line_of_offset(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

/// Field reader that rejects unknown keys and reports dotted paths.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path, std::vector<std::string> allowed, int line)
      : j_(j), path_(std::move(path)), line_(line) {
    if (!j_.is_object()) throw FormatError(where("") + "expected an object", line_, path_);
    for (const auto& [key, _] : j_.items())
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
        throw FormatError(where(key) + "unknown field", line_, join(key));
  }

  const json& require(const std::string& key) const {
    auto it = j_.find(key);
    if (it == j_.end()) throw FormatError(where(key) + "missing required field", line_, join(key));
    return *it;
  }

  int integer(const std::string& key) const {
    const auto& v = require(key);
    if (!v.is_number_integer()) throw FormatError(where(key) + "expected an integer", line_, join(key));
    return v.get<int>();
  }

  double number(const std::string& key) const {
    const auto& v = require(key);
    if (!v.is_number()) throw FormatError(where(key) + "expected a number", line_, join(key));
    return v.get<double>();
  }

  std::string string(const std::string& key) const {
    const auto& v = require(key);
    if (!v.is_string()) throw FormatError(where(key) + "expected a string", line_, join(key));
    return v.get<std::string>();
  }

  const json& array(const std::string& key) const {
    const auto& v = require(key);
    if (!v.is_array()) throw FormatError(where(key) + "expected an array", line_, join(key));
    return v;
  }

  std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  std::string where(const std::string& key) const {
    return "line " + std::to_string(line_) + ", field '" + join(key) + "': ";
  }
  const json& j_;
  std::string path_;
  int line_;
};

/// Source line on which each element of the top-level "activities" array opens.
std::vector<int> activity_lines(std::string_view text) {
  std::vector<int> lines;
  const auto key = text.find("\"activities\"");
  if (key == std::string_view::npos) return lines;
  int line = line_of_offset(text, key);
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = key + 12; i < text.size(); ++i) {
    const char ch = text[i];
    if (ch == '\n') ++line;
    if (in_string) {
      if (ch == '\\') ++i;
      else if (ch == '"') in_string = false;
      continue;
    }
    if (ch == '"') in_string = true;
    else if (ch == '[' || ch == '{') {
      if (depth == 1 && ch == '{') lines.push_back(line);
      ++depth;
    } else if (ch == ']' || ch == '}') {
      if (--depth == 0) break;
    }
  }
  return lines;
}

}  // namespace

std::string serialize_scenario(const Landscape& s) {
  // One activity per line so parse diagnostics point at a useful line.
  std::ostringstream out;
  out << "{\n";
  out << "  \"version\": " << kScenarioVersion << ",\n";
  out << "  \"K\": " << s.K << ",\n";
  out << "  \"width\": " << s.width << ",\n";
  out << "  \"height\": " << s.height << ",\n";
  out << "  \"T_total\": " << s.T_total << ",\n";
  out << "  \"activities\": [";
  for (std::size_t i = 0; i < s.activities.size(); ++i) {
    out << (i == 0 ? "\n    " : ",\n    ") << activity_to_json(s.activities[i]).dump();
  }
  out << (s.activities.empty() ? "]\n" : "\n  ]\n");
  out << "}\n";
  return out.str();
}

Landscape parse_scenario(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const int line = line_of_offset(text, e.byte > 0 ? e.byte - 1 : 0);
    throw FormatError("line " + std::to_string(line) + ": malformed JSON: " + e.what(), line, "");
  }

  const auto lines = activity_lines(text);
  auto activity_line = [&](std::size_t i) { return i < lines.size() ? lines[i] : 0; };

  ObjectReader top(root, "", {"version", "K", "width", "height", "T_total", "activities"}, 1);
  const int version = top.integer("version");
  if (version != kScenarioVersion)
    throw FormatError("unsupported scenario version " + std::to_string(version), 2, "version");

  Landscape s;
  s.K = top.integer("K");
  s.width = top.integer("width");
  s.height = top.integer("height");
  s.T_total = top.integer("T_total");
  const auto& acts = top.array("activities");
  for (std::size_t i = 0; i < acts.size(); ++i) {
    const std::string path = "activities[" + std::to_string(i) + "]";
    const int line = activity_line(i);
    ObjectReader ar(acts[i], path, {"label", "stream", "t_start", "t_end", "objects"}, line);
    Activity a;
    a.label = ar.integer("label");
    a.stream = ar.integer("stream");
    a.t_start = ar.integer("t_start");
    a.t_end = ar.integer("t_end");
    const auto& objs = ar.array("objects");
    for (std::size_t j = 0; j < objs.size(); ++j) {
      const std::string opath = path + ".objects[" + std::to_string(j) + "]";
      ObjectReader orr(objs[j], opath, {"kind", "extent", "positions"}, line);
      ObjectTrack o;
      try {
        o.kind = object_kind_from_string(orr.string("kind"));
      } catch (const ConfigError& e) {
        throw FormatError("line " + std::to_string(line) + ", field '" + opath + ".kind': " + e.what(), line,
                          opath + ".kind");
      }
      o.extent = orr.number("extent");
      const auto& pos = orr.array("positions");
      o.positions.reserve(pos.size());
      for (std::size_t p = 0; p < pos.size(); ++p) {
        const auto& xy = pos[p];
        if (!xy.is_array() || xy.size() != 2 || !xy[0].is_number_integer() || !xy[1].is_number_integer()) {
          const std::string field = opath + ".positions[" + std::to_string(p) + "]";
          throw FormatError("line " + std::to_string(line) + ", field '" + field + "': expected [x, y] integers",
                            line, field);
        }
        o.positions.push_back({xy[0].get<int>(), xy[1].get<int>()});
      }
      a.objects.push_back(std::move(o));
    }
    s.activities.push_back(std::move(a));
  }
  validate(s);
  return s;
}

void save_scenario(const Landscape& s, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << serialize_scenario(s);
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

Landscape load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open scenario file '" + path.string() + "'", 0, "");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

// ---------------------------------------------------------------------------
// Joint distribution

JointDistribution joint_from_counts(int K, int E, const std::vector<double>& counts) {
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  if (!(total > 0.0)) throw DomainError("joint distribution undefined: zero total activity frames");
  JointDistribution j;
  j.K = K;
  j.E = E;
  j.p.resize(counts.size());
  j.p_stream.assign(static_cast<std::size_t>(K), 0.0);
  j.p_activity.assign(static_cast<std::size_t>(E), 0.0);
  for (int k = 0; k < K; ++k)
    for (int e = 0; e < E; ++e) {
      const auto i = static_cast<std::size_t>(k) * static_cast<std::size_t>(E) + static_cast<std::size_t>(e);
      j.p[i] = counts[i] / total;
    }
  for (int k = 0; k < K; ++k)
    for (int e = 0; e < E; ++e) {
      const double v = j.at(k, e);
      j.p_stream[static_cast<std::size_t>(k)] += v;
      j.p_activity[static_cast<std::size_t>(e)] += v;
    }
  return j;
}

JointDistribution activity_joint(const Landscape& s, std::optional<TickWindow> window) {
  const TickWindow w = window.value_or(TickWindow{0, s.T_total});
  const int E = s.label_count();
  std::vector<double> counts(static_cast<std::size_t>(s.K) * static_cast<std::size_t>(std::max(E, 0)), 0.0);
  // Merge same-(stream, label) spans so co-occurring repeats count once per frame.
  for (int k = 0; k < s.K; ++k) {
    for (int e = 0; e < E; ++e) {
      std::vector<std::pair<int, int>> spans;
      for (const auto& a : s.activities)
        if (a.stream == k && a.label == e) {
          const int b = std::max(a.t_start, w.begin);
          const int en = std::min(a.t_end, w.end);
          if (b < en) spans.emplace_back(b, en);
        }
      std::sort(spans.begin(), spans.end());
      long frames = 0;
      int cur_b = 0, cur_e = 0;
      bool open = false;
      for (auto [b, en] : spans) {
        if (open && b <= cur_e) {
          cur_e = std::max(cur_e, en);
        } else {
          if (open) frames += cur_e - cur_b;
          cur_b = b;
          cur_e = en;
          open = true;
        }
      }
      if (open) frames += cur_e - cur_b;
      counts[static_cast<std::size_t>(k) * static_cast<std::size_t>(E) + static_cast<std::size_t>(e)] =
          static_cast<double>(frames);
    }
  }
  return joint_from_counts(s.K, E, counts);
}

}  // namespace forager
