#pragma once

// Line-oriented `key = value` configuration with `#` comments.
//
//   aign.l = 0.01           channel.T = 0.01         sweep.T = 1e-4, 1e-3
//   aign.v = 1              channel.x_max = 7        sweep.policy = both
//   aign.sigma2 = 1         channel.q1 = 0.6         baa.tol = 1e-9
//
// Sweep axes left unset fall back to the single-point value.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mcisi/bounds.hpp"

namespace mcisi {

class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  // Physical link and slotting.
  double l = 1e-2;
  double v = 1.0;
  double sigma2 = 1.0;
  double T = 1e-2;
  int x_max = 7;
  // Explicit arrival probabilities; override the physical model when set.
  std::optional<double> q1;
  std::optional<double> q2;

  // Sweep axes.
  std::vector<double> sweep_T, sweep_l, sweep_v, sweep_sigma2;
  BoundSelection bounds;
  InputPolicy policy = InputPolicy::both;

  BaaOptions baa;
  int restarts = 1;
  LowerBound optimize_bound = LowerBound::lb2;

  std::uint64_t seed = 1;
  std::int64_t sim_slots = 1000000;
  std::int64_t sim_lb2_slots = 1000000;
  double perturb_q1 = 0.0;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;

  std::vector<double> axis_T() const { return sweep_T.empty() ? std::vector<double>{T} : sweep_T; }
  std::vector<double> axis_l() const { return sweep_l.empty() ? std::vector<double>{l} : sweep_l; }
  std::vector<double> axis_v() const { return sweep_v.empty() ? std::vector<double>{v} : sweep_v; }
  std::vector<double> axis_sigma2() const {
    return sweep_sigma2.empty() ? std::vector<double>{sigma2} : sweep_sigma2;
  }

  /// Arrival probabilities of the single-point configuration.
  ArrivalProbs arrival() const {
    if (q1) return ArrivalProbs::from_probs(*q1, q2.value_or(0.0));
    return arrival_probs(AignParams(l, v, sigma2), T);
  }

  BoundsOptions bounds_options() const {
    BoundsOptions o;
    o.baa = baa;
    o.restarts = restarts;
    o.seed = seed;
    o.policy = policy;
    o.select = bounds;
    return o;
  }

  void validate() const {
    auto positive = [](double x, const char* what) {
      if (!(x > 0.0) || !std::isfinite(x)) throw config_error(std::string(what) + " must be finite and > 0");
    };
    positive(l, "aign.l");
    positive(v, "aign.v");
    positive(sigma2, "aign.sigma2");
    positive(T, "channel.T");
    if (x_max < 1) throw config_error("channel.x_max must be >= 1");
    for (double x : sweep_T) positive(x, "sweep.T");
    for (double x : sweep_l) positive(x, "sweep.l");
    for (double x : sweep_v) positive(x, "sweep.v");
    for (double x : sweep_sigma2) positive(x, "sweep.sigma2");
    if (restarts < 1) throw config_error("baa.restarts must be >= 1");
    if (sim_slots < 1) throw config_error("sim.slots must be >= 1");
    if (sim_lb2_slots < 2) throw config_error("sim.lb2_slots must be >= 2");
    if (q2 && !q1) throw config_error("channel.q2 requires channel.q1");
    try {
      baa.validate();
      if (q1) (void)ArrivalProbs::from_probs(*q1, q2.value_or(0.0));
    } catch (const invalid_parameter& e) {
      throw config_error(e.what());
    }
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (trim(v.substr(pos)).empty()) return d;
  } catch (const std::exception&) {
  }
  throw config_error("bad number for " + key + ": '" + v + "'");
}

inline std::int64_t parse_int(const std::string& key, const std::string& v) {
  // Accept 1e6-style counts as long as they are integral.
  const double d = parse_double(key, v);
  if (d != std::floor(d) || std::abs(d) > 9.0e18) throw config_error("expected an integer for " + key);
  return static_cast<std::int64_t>(d);
}

inline std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_double(key, item));
  }
  if (out.empty()) throw config_error(key + " must list at least one value");
  return out;
}

inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt17(v[i]);
  return s;
}

}  // namespace detail

inline void apply_setting(RunConfig& c, const std::string& key, const std::string& value) {
  using namespace detail;
  if (key == "aign.l") c.l = parse_double(key, value);
  else if (key == "aign.v") c.v = parse_double(key, value);
  else if (key == "aign.sigma2") c.sigma2 = parse_double(key, value);
  else if (key == "channel.T") c.T = parse_double(key, value);
  else if (key == "channel.x_max") c.x_max = static_cast<int>(parse_int(key, value));
  else if (key == "channel.q1") c.q1 = parse_double(key, value);
  else if (key == "channel.q2") c.q2 = parse_double(key, value);
  else if (key == "sweep.T") c.sweep_T = parse_list(key, value);
  else if (key == "sweep.l") c.sweep_l = parse_list(key, value);
  else if (key == "sweep.v") c.sweep_v = parse_list(key, value);
  else if (key == "sweep.sigma2") c.sweep_sigma2 = parse_list(key, value);
  else if (key == "sweep.bounds") {
    BoundSelection s{false, false, false, false, false};
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item == "lb1") s.lb1 = true;
      else if (item == "lb2") s.lb2 = true;
      else if (item == "ub") s.ub = true;
      else if (item == "dmc") s.dmc = true;
      else if (item == "mf") s.mf = true;
      else if (!item.empty()) throw config_error("unknown bound '" + item + "' in sweep.bounds");
    }
    c.bounds = s;
  } else if (key == "sweep.policy") {
    if (value == "uniform") c.policy = InputPolicy::uniform;
    else if (value == "optimized") c.policy = InputPolicy::optimized;
    else if (value == "both") c.policy = InputPolicy::both;
    else throw config_error("sweep.policy must be uniform, optimized or both");
  } else if (key == "baa.tol") c.baa.tol = parse_double(key, value);
  else if (key == "baa.max_iter") c.baa.max_iter = static_cast<int>(parse_int(key, value));
  else if (key == "baa.damping") c.baa.damping = parse_double(key, value);
  else if (key == "baa.floor") c.baa.floor = parse_double(key, value);
  else if (key == "baa.scheme") {
    if (value == "corrected") c.baa.scheme = ModifiedScheme::gradient_corrected;
    else if (value == "frozen") c.baa.scheme = ModifiedScheme::frozen_channel;
    else throw config_error("baa.scheme must be corrected or frozen");
  } else if (key == "baa.restarts") c.restarts = static_cast<int>(parse_int(key, value));
  else if (key == "optimize.bound") {
    if (value == "lb1") c.optimize_bound = LowerBound::lb1;
    else if (value == "lb2") c.optimize_bound = LowerBound::lb2;
    else throw config_error("optimize.bound must be lb1 or lb2");
  } else if (key == "seed") {
    const std::string v = trim(value);
    try {
      if (v.empty() || v.front() == '-' || v.front() == '+') throw config_error("bad seed");
      std::size_t pos = 0;
      c.seed = std::stoull(v, &pos);
      if (pos != v.size()) throw config_error("bad seed");
    } catch (const std::exception&) {
      throw config_error("seed must be an unsigned 64-bit integer");
    }
  } else if (key == "sim.slots") c.sim_slots = parse_int(key, value);
  else if (key == "sim.lb2_slots") c.sim_lb2_slots = parse_int(key, value);
  else if (key == "validate.perturb_q1") c.perturb_q1 = parse_double(key, value);
  else throw config_error("unknown config key '" + key + "'");
}

inline RunConfig parse_config(std::istream& in, RunConfig c = {}) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw config_error("line " + std::to_string(lineno) + ": expected key = value");
    }
    apply_setting(c, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
  }
  return c;
}

inline RunConfig parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file '" + path + "'");
  return parse_config(in);
}

/// Every setting, in a fixed order; parse_config_string inverts it.
inline std::string serialize_config(const RunConfig& c) {
  using detail::fmt17;
  std::ostringstream os;
  os << "aign.l = " << fmt17(c.l) << "\n"
     << "aign.v = " << fmt17(c.v) << "\n"
     << "aign.sigma2 = " << fmt17(c.sigma2) << "\n"
     << "channel.T = " << fmt17(c.T) << "\n"
     << "channel.x_max = " << c.x_max << "\n";
  if (c.q1) os << "channel.q1 = " << fmt17(*c.q1) << "\n";
  if (c.q2) os << "channel.q2 = " << fmt17(*c.q2) << "\n";
  if (!c.sweep_T.empty()) os << "sweep.T = " << detail::join(c.sweep_T) << "\n";
  if (!c.sweep_l.empty()) os << "sweep.l = " << detail::join(c.sweep_l) << "\n";
  if (!c.sweep_v.empty()) os << "sweep.v = " << detail::join(c.sweep_v) << "\n";
  if (!c.sweep_sigma2.empty()) os << "sweep.sigma2 = " << detail::join(c.sweep_sigma2) << "\n";
  std::string sel;
  auto add = [&sel](bool on, const char* name) {
    if (on) sel += (sel.empty() ? "" : ",") + std::string(name);
  };
  add(c.bounds.lb1, "lb1");
  add(c.bounds.lb2, "lb2");
  add(c.bounds.ub, "ub");
  add(c.bounds.dmc, "dmc");
  add(c.bounds.mf, "mf");
  os << "sweep.bounds = " << sel << "\n";
  os << "sweep.policy = "
     << (c.policy == InputPolicy::uniform ? "uniform" : c.policy == InputPolicy::optimized ? "optimized" : "both")
     << "\n";
  os << "baa.tol = " << fmt17(c.baa.tol) << "\n"
     << "baa.max_iter = " << c.baa.max_iter << "\n"
     << "baa.damping = " << fmt17(c.baa.damping) << "\n"
     << "baa.floor = " << fmt17(c.baa.floor) << "\n"
     << "baa.scheme = " << to_string(c.baa.scheme) << "\n"
     << "baa.restarts = " << c.restarts << "\n"
     << "optimize.bound = " << to_string(c.optimize_bound) << "\n"
     << "seed = " << c.seed << "\n"
     << "sim.slots = " << c.sim_slots << "\n"
     << "sim.lb2_slots = " << c.sim_lb2_slots << "\n"
     << "validate.perturb_q1 = " << fmt17(c.perturb_q1) << "\n";
  return os.str();
}

}  // namespace mcisi
