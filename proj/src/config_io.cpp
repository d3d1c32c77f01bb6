// src/config_io.cpp

#include "forager/config_io.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "forager/error.hpp"

namespace forager {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

ordered_json stable_json(const StableParams& p) {
  return {{"alpha", p.alpha}, {"beta", p.beta}, {"gamma", p.gamma}, {"delta_loc", p.delta_loc}};
}

// Reads optional keys of one JSON object, rejecting keys it was not told about.
class Fields {
 public:
  Fields(const json& j, std::string path, std::initializer_list<const char*> allowed) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("", "expected an object");
    for (const auto& [key, _] : j_.items()) {
      bool ok = false;
      for (const char* a : allowed) ok = ok || key == a;
      if (!ok) fail(key, "unknown field");
    }
  }

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    throw ConfigError("config field '" + name(key) + "': " + msg);
  }

  std::string name(const std::string& key) const {
    if (path_.empty()) return key;
    return key.empty() ? path_ : path_ + "." + key;
  }

  const json* find(const char* key) const {
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void number(const char* key, double& out) const {
    if (const json* v = find(key)) {
      if (!v->is_number()) fail(key, "expected a number");
      out = v->get<double>();
    }
  }

  void integer(const char* key, int& out) const {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) fail(key, "expected an integer");
      out = v->get<int>();
    }
  }

 private:
  const json& j_;
  std::string path_;
};

void read_stable(const json& j, const std::string& path, StableParams& p) {
  Fields f(j, path, {"alpha", "beta", "gamma", "delta_loc"});
  f.number("alpha", p.alpha);
  f.number("beta", p.beta);
  f.number("gamma", p.gamma);
  f.number("delta_loc", p.delta_loc);
}

}  // namespace

std::string config_to_json(const ForagerConfig& c, int indent) {
  ordered_json j;
  j["task_prior"] = {{"face", c.task_prior[0]}, {"body", c.task_prior[1]}};
  j["N_P_max"] = c.N_P_max;
  j["N_s"] = c.N_s;
  j["N_new"] = c.N_new;
  j["cell_grid"] = {{"rows", c.cell_grid.rows}, {"cols", c.cell_grid.cols}};
  j["stable_params"] = {{"fixational", stable_json(c.stable_params.fixational)},
                        {"pursuit", stable_json(c.stable_params.pursuit)},
                        {"saccade", stable_json(c.stable_params.saccade)}};
  j["sigma_s"] = c.sigma_s ? ordered_json(*c.sigma_s) : ordered_json(nullptr);
  j["detector_accuracy"] = c.detector_accuracy;
  j["delta_D"] = c.delta_D;
  j["delta_H"] = c.delta_H;
  j["likelihood_floor"] = c.likelihood_floor;
  j["sensor"] = {{"floor", c.sensor.floor},
                 {"noise", c.sensor.noise},
                 {"amplitude", c.sensor.amplitude},
                 {"miss_rate", c.sensor.miss_rate},
                 {"false_alarm_rate", c.sensor.false_alarm_rate},
                 {"false_alarm_extent", c.sensor.false_alarm_extent}};
  j["strategy"] = {{"kind", std::string(to_string(c.strategy.kind))},
                   {"nu0", c.strategy.nu0},
                   {"Delta0", c.strategy.Delta0},
                   {"charnov_slope", c.strategy.charnov_slope},
                   {"travel_time", c.strategy.travel_time},
                   {"dwell", c.strategy.dwell},
                   {"max_dwell", c.strategy.max_dwell}};
  j["seed"] = c.seed;
  j["setup_ticks"] = c.setup_ticks;
  return j.dump(indent) + "\n";
}

ForagerConfig config_from_json(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ForagerConfig c;
  Fields top(root, "",
             {"task_prior", "N_P_max", "N_s", "N_new", "cell_grid", "stable_params", "sigma_s", "detector_accuracy",
              "delta_D", "delta_H", "likelihood_floor", "sensor", "strategy", "seed", "setup_ticks"});

  if (const json* tp = top.find("task_prior")) {
    if (tp->is_array()) {
      if (tp->size() != 2 || !(*tp)[0].is_number() || !(*tp)[1].is_number())
        top.fail("task_prior", "expected [face, body] numbers");
      c.task_prior = {(*tp)[0].get<double>(), (*tp)[1].get<double>()};
    } else {
      Fields f(*tp, "task_prior", {"face", "body"});
      f.number("face", c.task_prior[0]);
      f.number("body", c.task_prior[1]);
    }
  }
  top.integer("N_P_max", c.N_P_max);
  top.integer("N_s", c.N_s);
  top.integer("N_new", c.N_new);
  if (const json* g = top.find("cell_grid")) {
    Fields f(*g, "cell_grid", {"rows", "cols"});
    f.integer("rows", c.cell_grid.rows);
    f.integer("cols", c.cell_grid.cols);
  }
  if (const json* sp = top.find("stable_params")) {
    Fields f(*sp, "stable_params", {"fixational", "pursuit", "saccade"});
    if (const json* v = f.find("fixational")) read_stable(*v, "stable_params.fixational", c.stable_params.fixational);
    if (const json* v = f.find("pursuit")) read_stable(*v, "stable_params.pursuit", c.stable_params.pursuit);
    if (const json* v = f.find("saccade")) read_stable(*v, "stable_params.saccade", c.stable_params.saccade);
  }
  if (const json* v = top.find("sigma_s")) {
    if (v->is_null()) {
      c.sigma_s.reset();
    } else {
      if (!v->is_number()) top.fail("sigma_s", "expected a number or null");
      c.sigma_s = v->get<double>();
    }
  }
  top.number("detector_accuracy", c.detector_accuracy);
  top.number("delta_D", c.delta_D);
  top.number("delta_H", c.delta_H);
  top.number("likelihood_floor", c.likelihood_floor);
  if (const json* v = top.find("sensor")) {
    Fields f(*v, "sensor", {"floor", "noise", "amplitude", "miss_rate", "false_alarm_rate", "false_alarm_extent"});
    f.number("floor", c.sensor.floor);
    f.number("noise", c.sensor.noise);
    f.number("amplitude", c.sensor.amplitude);
    f.number("miss_rate", c.sensor.miss_rate);
    f.number("false_alarm_rate", c.sensor.false_alarm_rate);
    f.number("false_alarm_extent", c.sensor.false_alarm_extent);
  }
  if (const json* v = top.find("strategy")) {
    Fields f(*v, "strategy", {"kind", "nu0", "Delta0", "charnov_slope", "travel_time", "dwell", "max_dwell"});
    if (const json* k = f.find("kind")) {
      if (!k->is_string()) f.fail("kind", "expected a string");
      try {
        c.strategy.kind = strategy_kind_from_string(k->get<std::string>());
      } catch (const ConfigError& e) {
        f.fail("kind", e.what());
      }
    }
    f.number("nu0", c.strategy.nu0);
    f.number("Delta0", c.strategy.Delta0);
    f.number("charnov_slope", c.strategy.charnov_slope);
    f.number("travel_time", c.strategy.travel_time);
    f.number("dwell", c.strategy.dwell);
    f.number("max_dwell", c.strategy.max_dwell);
  }
  if (const json* v = top.find("seed")) {
    if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<long long>() >= 0))
      top.fail("seed", "expected a nonnegative integer");
    c.seed = v->get<std::uint64_t>();
  }
  top.integer("setup_ticks", c.setup_ticks);
  c.validate();
  return c;
}

ForagerConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return config_from_json(buf.str());
}

void save_config(const ForagerConfig& c, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write config to '" + path.string() + "'");
  out << config_to_json(c);
}

}  // namespace forager
