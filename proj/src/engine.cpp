// src/engine.cpp

#include "forager/engine.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include "forager/error.hpp"

namespace forager {

namespace {

// Substream tags under the master seed.
constexpr std::uint64_t kPreattentiveTag = 1;
constexpr std::uint64_t kAttentiveTag = 2;
constexpr std::uint64_t kSelectionTag = 3;
constexpr std::uint64_t kStrategyTag = 4;

CellGrid cells_for(const Landscape& s, const ForagerConfig& c) {
  return CellGrid{c.cell_grid.rows, c.cell_grid.cols, s.width, s.height};
}

AttentionOptions attention_for(const Landscape& s, const ForagerConfig& c) {
  AttentionOptions o;
  o.task_prior = c.task_prior;
  o.foa_radius = foa_radius_for(s.width, s.height);
  o.likelihood_floor = c.likelihood_floor;
  return o;
}

TickWindow resolve_window(const Landscape& s, const std::optional<TickWindow>& w) {
  const TickWindow out = w.value_or(TickWindow{0, s.T_total});
  if (out.begin < 0 || out.end > s.T_total || out.begin > out.end)
    throw ConfigError("tick window [" + std::to_string(out.begin) + ", " + std::to_string(out.end) +
                      ") lies outside the landscape");
  return out;
}

}  // namespace

void ForagerConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& msg) {
    throw ConfigError("config field '" + field + "': " + msg);
  };
  double prior_sum = 0.0;
  for (double p : task_prior) {
    if (!(p >= 0.0 && p <= 1.0)) fail("task_prior", "entries must lie in [0, 1]");
    prior_sum += p;
  }
  if (std::abs(prior_sum - 1.0) > 1e-9) fail("task_prior", "must sum to 1");
  if (N_P_max < 1) fail("N_P_max", "must be >= 1");
  if (N_s < 1) fail("N_s", "must be >= 1");
  if (N_new < 1) fail("N_new", "must be >= 1");
  if (cell_grid.rows < 1 || cell_grid.cols < 1 || cell_grid.rows * cell_grid.cols < 2)
    fail("cell_grid", "rows * cols must be >= 2");
  try {
    stable_params.fixational.validate();
    stable_params.pursuit.validate();
    stable_params.saccade.validate();
  } catch (const DomainError& e) {
    fail("stable_params", e.what());
  }
  if (sigma_s && !(*sigma_s > 0.0)) fail("sigma_s", "must be > 0");
  if (!(detector_accuracy >= 0.0 && detector_accuracy <= 1.0)) fail("detector_accuracy", "must lie in [0, 1]");
  if (!(delta_D >= 0.0)) fail("delta_D", "must be >= 0");
  if (!(delta_H >= 0.0)) fail("delta_H", "must be >= 0");
  if (!(likelihood_floor >= 0.0)) fail("likelihood_floor", "must be >= 0");
  if (!(sensor.floor >= 0.0) || !(sensor.noise >= 0.0) || !(sensor.amplitude > 0.0)) fail("sensor", "levels must be nonnegative, amplitude positive");
  if (!(sensor.miss_rate >= 0.0 && sensor.miss_rate <= 1.0)) fail("sensor.miss_rate", "must lie in [0, 1]");
  if (!(sensor.false_alarm_rate >= 0.0 && sensor.false_alarm_rate <= 1.0)) fail("sensor.false_alarm_rate", "must lie in [0, 1]");
  if (!(sensor.false_alarm_extent > 0.0)) fail("sensor.false_alarm_extent", "must be > 0");
  try {
    strategy.validate();
  } catch (const ConfigError& e) {
    fail("strategy", e.what());
  }
  if (setup_ticks < 0) fail("setup_ticks", "must be >= 0");
}

TickWindow test_window(const Landscape& s, const ForagerConfig& c) {
  if (c.setup_ticks > 0 && c.setup_ticks < s.T_total) return {c.setup_ticks, s.T_total};
  return {0, s.T_total};
}

TickWindow setup_window(const Landscape& s, const ForagerConfig& c) {
  if (c.setup_ticks > 0 && c.setup_ticks < s.T_total) return {0, c.setup_ticks};
  return {0, s.T_total};
}

ComplexityIndex preattentive_complexity(const Landscape& s, const ActivityIndex& index, const ForagerConfig& c,
                                        int stream, int tick, Rng& rng) {
  const CellGrid cells = cells_for(s, c);
  // A noiseless empty frame is constant, so nothing exceeds its percentile.
  if (c.sensor.noise == 0.0 && index.active(stream, tick).empty()) return complexity({}, cells, stream, tick);
  // Preattentive priority ignores object features, so only the bottom-up field is built.
  const FeatureField f{synthesize_bottom_up(s, index, stream, tick, c.sensor, rng), {}};
  PriorityMap map = [&] {
    try {
      return priority_posterior(f, PerceptionMode::preattentive, std::nullopt, {}, tick, stream);
    } catch (const DegenerateError&) {
      return uniform_priority(s.width, s.height, tick, stream, PerceptionMode::preattentive);
    }
  }();
  auto protos = extract_proto_objects(map, c.N_P_max);
  if (protos.empty()) return complexity({}, cells, stream, tick);
  protos = sample_interest_points(std::move(protos), c.N_s, map, rng);
  const auto ips = all_interest_points(protos);
  return complexity(ips, cells, stream, tick);
}

PreattentiveTrace compute_preattentive(const Landscape& s, const ForagerConfig& c, TickWindow window, int jobs) {
  c.validate();
  window = resolve_window(s, window);
  PreattentiveTrace trace;
  trace.window = window;
  trace.K = s.K;
  trace.data.resize(static_cast<std::size_t>(window.length()) * static_cast<std::size_t>(s.K));
  const ActivityIndex index(s);

  auto work = [&](int stream) {
    Rng rng(derive_seed(c.seed, kPreattentiveTag, static_cast<std::uint64_t>(stream)));
    for (int t = window.begin; t < window.end; ++t)
      trace.data[static_cast<std::size_t>(t - window.begin) * static_cast<std::size_t>(s.K) +
                 static_cast<std::size_t>(stream)] = preattentive_complexity(s, index, c, stream, t, rng);
  };

  jobs = std::clamp(jobs, 1, s.K);
  if (jobs == 1) {
    for (int k = 0; k < s.K; ++k) work(k);
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j)
      pool.emplace_back([&, j] {
        for (int k = j; k < s.K; k += jobs) work(k);
      });
    for (auto& th : pool) th.join();
  }
  return trace;
}

namespace {

void dump_frame(const std::filesystem::path& dir, int tick, const PriorityMap& map,
                const std::vector<ProtoObject>& protos) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / ("map_" + std::to_string(tick) + ".csv"));
    for (int y = 0; y < map.grid.height(); ++y) {
      for (int x = 0; x < map.grid.width(); ++x) out << (x ? "," : "") << format_double(map.grid(x, y));
      out << '\n';
    }
  }
  std::ofstream out(dir / ("protos_" + std::to_string(tick) + ".csv"));
  out << "id,mu_x,mu_y,sigma_xx,sigma_xy,sigma_yy,area,mass,n_ips\n";
  for (const auto& p : protos)
    out << p.id << ',' << format_double(p.mu.x) << ',' << format_double(p.mu.y) << ',' << format_double(p.sigma.xx)
        << ',' << format_double(p.sigma.xy) << ',' << format_double(p.sigma.yy) << ',' << format_double(p.area) << ','
        << format_double(p.mass) << ',' << p.ips.size() << '\n';
}

}  // namespace

Timeline run(const Landscape& s, const ForagerConfig& c, const RunOptions& options) {
  c.validate();
  validate(s);
  const TickWindow window = resolve_window(s, options.window);

  PreattentiveTrace owned;
  const PreattentiveTrace* trace = options.preattentive;
  if (trace == nullptr) {
    owned = compute_preattentive(s, c, window, options.jobs);
    trace = &owned;
  } else if (trace->window.begin != window.begin || trace->window.end != window.end || trace->K != s.K) {
    throw ConfigError("cached preattentive trace does not match the run window");
  }

  const ActivityIndex index(s);
  const CellGrid cells = cells_for(s, c);
  const AttentionOptions attention = attention_for(s, c);
  const double radius = attention.foa_radius;
  const Mat2 sigma_s = Mat2::identity(c.sigma_s.value_or(radius * radius));
  const DetectionTiming timing{c.delta_D, c.delta_H};
  const Vec2 centre{s.width / 2.0, s.height / 2.0};

  Rng attentive_rng(derive_seed(c.seed, kAttentiveTag));
  Rng selection_rng(derive_seed(c.seed, kSelectionTag));
  Rng strategy_rng(derive_seed(c.seed, kStrategyTag));

  GivingUpPolicy policy(c.strategy);
  GazeState gaze{centre, radius, 0, Regime::fixational};
  Timeline tl;
  tl.entries.reserve(static_cast<std::size_t>(window.length()));

  bool attending = false;
  int current = -1;
  int t_in = 0;
  LeaveReason pending = LeaveReason::none;  // hypothesis failure awaiting the minimum dwell
  LeaveReason leaving = LeaveReason::none;

  std::vector<double> cs(static_cast<std::size_t>(s.K));
  for (int t = window.begin; t < window.end; ++t) {
    for (int k = 0; k < s.K; ++k) cs[static_cast<std::size_t>(k)] = trace->at(t, k).C;

    if (attending) {
      const int t_rel = t - t_in;
      double others = 0.0;
      for (int k = 0; k < s.K; ++k)
        if (k != current) others += cs[static_cast<std::size_t>(k)];
      const double others_mean = s.K > 1 ? others / (s.K - 1) : 0.0;
      LeaveReason reason = policy.should_leave({t_rel, cs[static_cast<std::size_t>(current)], others_mean});
      if (t_rel == 0) {
        pending = reason;
        reason = LeaveReason::none;
      } else if (t_rel == 1 && pending != LeaveReason::none) {
        reason = pending;
      }
      if (reason != LeaveReason::none) {
        attending = false;
        leaving = reason;
      }
    }

    if (!attending) {
      // Travel tick: choose the next stream and move gaze to its centre.
      const auto choice = stream_choice_distribution(std::span<const double>(cs));
      const int next = select_stream(choice.p, selection_rng);
      TimelineEntry e;
      e.tick = t;
      e.stream = next;
      e.foa = centre;
      if (current >= 0) {
        e.switched = true;
        e.leave_reason = leaving;
        tl.switches.push_back({t, current, next});
      }
      tl.entries.push_back(e);
      const double mean_all = std::accumulate(cs.begin(), cs.end(), 0.0) / s.K;
      current = next;
      t_in = t + 1;
      gaze = GazeState{centre, radius, next, Regime::fixational};
      policy.enter({t_in, cs[static_cast<std::size_t>(next)], mean_all}, strategy_rng);
      pending = LeaveReason::none;
      leaving = LeaveReason::none;
      attending = true;
      continue;
    }

    // Attentive handling of the current stream.
    const FeatureField f = synthesize_features(s, index, current, t, c.sensor, attentive_rng);
    PriorityMap map = [&] {
      try {
        return priority_posterior(f, PerceptionMode::attentive, gaze.foa, attention, t, current);
      } catch (const DegenerateError&) {
        return uniform_priority(s.width, s.height, t, current, PerceptionMode::attentive);
      }
    }();
    auto protos = extract_proto_objects(map, c.N_P_max);
    if (!protos.empty()) protos = sample_interest_points(std::move(protos), c.N_s, map, attentive_rng);
    const auto ips = all_interest_points(protos);
    const ComplexityIndex ci = complexity(ips, cells, current, t);
    if (options.dump_dir) dump_frame(*options.dump_dir, t, map, protos);

    const GazeProposal proposal =
        propose_gaze_shifts(gaze, ips, ci, c.N_new, c.stable_params, s.width, s.height, attentive_rng);
    gaze.foa = choose_foa(proposal.candidates, ips, sigma_s);
    gaze.regime = proposal.regime;
    const RewardEvent ev = attempt_detection(gaze, s, index, t, c.detector_accuracy, timing, attentive_rng);
    policy.observe(ev);

    TimelineEntry e;
    e.tick = t;
    e.stream = current;
    e.foa = gaze.foa;
    e.regime = gaze.regime;
    e.hit = ev.hit;
    tl.entries.push_back(e);
  }
  return tl;
}

// ---------------------------------------------------------------------------
// CSV

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

constexpr std::string_view kTimelineHeader = "tick,stream,foa_x,foa_y,regime,hit,switch_flag,leave_reason";

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <class T>
T parse_number(std::string_view field, int line, const char* name) {
  T value{};
  const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
  if (res.ec != std::errc{} || res.ptr != field.data() + field.size())
    throw FormatError("timeline line " + std::to_string(line) + ": bad value '" + std::string(field) + "' in column " +
                          name,
                      line, name);
  return value;
}

}  // namespace

std::string timeline_csv(const Timeline& tl) {
  std::string out(kTimelineHeader);
  out += '\n';
  for (const auto& e : tl.entries) {
    out += std::to_string(e.tick);
    out += ',';
    out += std::to_string(e.stream);
    out += ',';
    out += format_double(e.foa.x);
    out += ',';
    out += format_double(e.foa.y);
    out += ',';
    out += e.regime ? to_string(*e.regime) : "travel";
    out += e.hit ? ",1," : ",0,";
    out += e.switched ? "1," : "0,";
    out += to_string(e.leave_reason);
    out += '\n';
  }
  return out;
}

Timeline parse_timeline_csv(std::string_view text) {
  Timeline tl;
  std::size_t pos = 0;
  int line_no = 0;
  int prev_stream = -1;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line_no == 1) {
      if (line != kTimelineHeader) throw FormatError("timeline: unexpected header", 1, "header");
      continue;
    }
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 8) throw FormatError("timeline line " + std::to_string(line_no) + ": expected 8 columns", line_no, "");
    TimelineEntry e;
    e.tick = parse_number<int>(f[0], line_no, "tick");
    e.stream = parse_number<int>(f[1], line_no, "stream");
    e.foa = {parse_number<double>(f[2], line_no, "foa_x"), parse_number<double>(f[3], line_no, "foa_y")};
    if (f[4] != "travel") {
      try {
        e.regime = regime_from_string(f[4]);
      } catch (const ConfigError& err) {
        throw FormatError("timeline line " + std::to_string(line_no) + ": " + err.what(), line_no, "regime");
      }
    }
    e.hit = parse_number<int>(f[5], line_no, "hit") != 0;
    e.switched = parse_number<int>(f[6], line_no, "switch_flag") != 0;
    try {
      e.leave_reason = leave_reason_from_string(f[7]);
    } catch (const ConfigError& err) {
      throw FormatError("timeline line " + std::to_string(line_no) + ": " + err.what(), line_no, "leave_reason");
    }
    if (e.switched) {
      if (prev_stream < 0) throw FormatError("timeline line " + std::to_string(line_no) + ": switch without a prior stream", line_no, "switch_flag");
      tl.switches.push_back({e.tick, prev_stream, e.stream});
    }
    prev_stream = e.stream;
    tl.entries.push_back(e);
  }
  if (line_no == 0) throw FormatError("timeline: empty file", 0, "header");
  return tl;
}

void emit_timeline(const Timeline& tl, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write timeline to '" + path.string() + "'");
  out << timeline_csv(tl);
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

Timeline load_timeline(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open timeline '" + path.string() + "'", 0, "");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_timeline_csv(buf.str());
}

std::string complexity_trace_csv(const PreattentiveTrace& trace) {
  std::string out = "tick,stream,H,delta,omega,C\n";
  for (int t = trace.window.begin; t < trace.window.end; ++t)
    for (int k = 0; k < trace.K; ++k) {
      const auto& c = trace.at(t, k);
      out += std::to_string(t) + ',' + std::to_string(k) + ',' + format_double(c.H) + ',' + format_double(c.delta) +
             ',' + format_double(c.omega) + ',' + format_double(c.C) + '\n';
    }
  return out;
}

std::string gaze_trace_csv(const Timeline& tl) {
  std::string out = "tick,stream,foa_x,foa_y,regime,hit\n";
  for (const auto& e : tl.entries) {
    if (e.travel()) continue;
    out += std::to_string(e.tick) + ',' + std::to_string(e.stream) + ',' + format_double(e.foa.x) + ',' +
           format_double(e.foa.y) + ',' + std::string(to_string(*e.regime)) + (e.hit ? ",1\n" : ",0\n");
  }
  return out;
}

}  // namespace forager
