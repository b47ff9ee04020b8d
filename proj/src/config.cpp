#include "nsch/config.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "nsch/errors.hpp"
#include "nsch/output.hpp"

namespace nsch {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ',' || s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ',' && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

double to_double(std::string_view key, std::string_view v) {
  try {
    return parse_double(v);
  } catch (const std::invalid_argument&) {
    throw ConfigError(std::string(key) + ": expected a number, got '" + std::string(v) + "'");
  }
}

long long to_integer(std::string_view key, std::string_view v) {
  const double d = to_double(key, v);
  if (d != static_cast<double>(static_cast<long long>(d))) {
    throw ConfigError(std::string(key) + ": expected an integer, got '" + std::string(v) + "'");
  }
  return static_cast<long long>(d);
}

std::vector<double> to_list(std::string_view key, std::string_view v) {
  std::vector<double> out;
  for (auto item : split_list(v)) out.push_back(to_double(key, item));
  return out;
}

const char* field_name(FieldId f) {
  switch (f) {
    case FieldId::Rho: return "rho";
    case FieldId::U: return "u";
    case FieldId::Chi: return "chi";
  }
  return "?";
}

std::vector<Mode> to_modes(std::string_view key, std::string_view v) {
  std::vector<Mode> modes;
  for (auto item : split_list(v)) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    for (;;) {
      const auto pos = item.find(':', start);
      parts.push_back(item.substr(start, pos - start));
      if (pos == std::string_view::npos) break;
      start = pos + 1;
    }
    if (parts.size() != 4) {
      throw ConfigError(std::string(key) + ": mode '" + std::string(item) +
                        "' is not field:wave:amplitude:phase");
    }
    Mode m;
    if (parts[0] == "rho") m.field = FieldId::Rho;
    else if (parts[0] == "u") m.field = FieldId::U;
    else if (parts[0] == "chi") m.field = FieldId::Chi;
    else throw ConfigError(std::string(key) + ": unknown field '" + std::string(parts[0]) + "'");
    m.wave = static_cast<int>(to_integer(key, parts[1]));
    m.amplitude = to_double(key, parts[2]);
    m.phase = to_double(key, parts[3]);
    modes.push_back(m);
  }
  return modes;
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += format_double(v[i]);
  }
  return out;
}

using Setter = std::function<void(RunConfig&, std::string_view key, std::string_view value)>;
using Getter = std::function<std::string(const RunConfig&)>;

struct Entry {
  Setter set;
  Getter get;
};

template <class T>
Entry number(T RunConfig::*member) {
  return {[member](RunConfig& c, std::string_view k, std::string_view v) {
            if constexpr (std::is_integral_v<T>) c.*member = static_cast<T>(to_integer(k, v));
            else c.*member = to_double(k, v);
          },
          [member](const RunConfig& c) {
            if constexpr (std::is_integral_v<T>) return std::to_string(c.*member);
            else return format_double(c.*member);
          }};
}

template <class Outer, class T>
Entry nested(Outer RunConfig::*outer, T Outer::*member) {
  return {[=](RunConfig& c, std::string_view k, std::string_view v) {
            if constexpr (std::is_integral_v<T>) (c.*outer).*member = static_cast<T>(to_integer(k, v));
            else (c.*outer).*member = to_double(k, v);
          },
          [=](const RunConfig& c) {
            if constexpr (std::is_integral_v<T>) return std::to_string((c.*outer).*member);
            else return format_double((c.*outer).*member);
          }};
}

const std::map<std::string, Entry, std::less<>>& registry() {
  static const std::map<std::string, Entry, std::less<>> table = [] {
    std::map<std::string, Entry, std::less<>> t;
    t["grid.length"] = number(&RunConfig::length);
    t["grid.cells"] = number(&RunConfig::cells);
    t["grid.bc"] = {[](RunConfig& c, std::string_view k, std::string_view v) {
                      if (v == "periodic") c.bc = Boundary::Periodic;
                      else if (v == "mixed") c.bc = Boundary::Mixed;
                      else throw ConfigError(std::string(k) + ": must be periodic or mixed");
                    },
                    [](const RunConfig& c) {
                      return std::string(c.bc == Boundary::Periodic ? "periodic" : "mixed");
                    }};
    t["params.nu"] = nested(&RunConfig::params, &Params::nu);
    t["params.epsilon"] = nested(&RunConfig::params, &Params::epsilon);
    t["params.a"] = nested(&RunConfig::params, &Params::a);
    t["params.gamma"] = nested(&RunConfig::params, &Params::gamma);
    t["params.lambda"] = nested(&RunConfig::params, &Params::lambda);
    t["controls.dt_max"] = nested(&RunConfig::controls, &RunControls::dt_max);
    t["controls.max_retries"] = nested(&RunConfig::controls, &RunControls::max_retries);
    auto step = [](auto member) -> Entry {
      return {[=](RunConfig& c, std::string_view k, std::string_view v) {
                using T = std::remove_cvref_t<decltype(c.controls.step.*member)>;
                if constexpr (std::is_integral_v<T>) c.controls.step.*member = static_cast<T>(to_integer(k, v));
                else c.controls.step.*member = to_double(k, v);
              },
              [=](const RunConfig& c) {
                using T = std::remove_cvref_t<decltype(c.controls.step.*member)>;
                if constexpr (std::is_integral_v<T>) return std::to_string(c.controls.step.*member);
                else return format_double(c.controls.step.*member);
              }};
    };
    t["controls.cfl"] = step(&StepControls::cfl);
    t["controls.picard_tol"] = step(&StepControls::picard_tol);
    t["controls.picard_max"] = step(&StepControls::picard_max);
    t["controls.rho_floor"] = step(&StepControls::rho_floor);
    t["initial.kind"] = {[](RunConfig& c, std::string_view k, std::string_view v) {
                           if (v == "constant") c.initial.kind = InitialKind::Constant;
                           else if (v == "perturbed") c.initial.kind = InitialKind::Perturbed;
                           else if (v == "noise") c.initial.kind = InitialKind::Noise;
                           else throw ConfigError(std::string(k) + ": must be constant, perturbed or noise");
                         },
                         [](const RunConfig& c) {
                           switch (c.initial.kind) {
                             case InitialKind::Constant: return std::string("constant");
                             case InitialKind::Perturbed: return std::string("perturbed");
                             case InitialKind::Noise: return std::string("noise");
                           }
                           return std::string();
                         }};
    auto base = [](double ConstantIC::*member) -> Entry {
      return {[=](RunConfig& c, std::string_view k, std::string_view v) {
                c.initial.base.*member = to_double(k, v);
              },
              [=](const RunConfig& c) { return format_double(c.initial.base.*member); }};
    };
    t["initial.rho"] = base(&ConstantIC::rho);
    t["initial.u"] = base(&ConstantIC::u);
    t["initial.chi"] = base(&ConstantIC::chi);
    t["initial.modes"] = {[](RunConfig& c, std::string_view k, std::string_view v) {
                            c.initial.modes = to_modes(k, v);
                          },
                          [](const RunConfig& c) {
                            std::string out;
                            for (const auto& m : c.initial.modes) {
                              if (!out.empty()) out += ' ';
                              out += std::string(field_name(m.field)) + ':' +
                                     std::to_string(m.wave) + ':' + format_double(m.amplitude) +
                                     ':' + format_double(m.phase);
                            }
                            return out;
                          }};
    t["initial.amplitude"] = {[](RunConfig& c, std::string_view k, std::string_view v) {
                                c.initial.amplitude = to_double(k, v);
                              },
                              [](const RunConfig& c) { return format_double(c.initial.amplitude); }};
    t["initial.seed"] = {[](RunConfig& c, std::string_view k, std::string_view v) {
                           const long long s = to_integer(k, v);
                           if (s < 0) throw ConfigError(std::string(k) + ": must be >= 0");
                           c.initial.seed = static_cast<std::uint64_t>(s);
                         },
                         [](const RunConfig& c) { return std::to_string(c.initial.seed); }};
    t["run.t_end"] = number(&RunConfig::t_end);
    t["output.directory"] = {[](RunConfig& c, std::string_view, std::string_view v) {
                               c.directory = std::string(v);
                             },
                             [](const RunConfig& c) { return c.directory; }};
    t["output.record_every"] = number(&RunConfig::record_every);
    t["output.snapshot_times"] = {[](RunConfig& c, std::string_view k, std::string_view v) {
                                    c.snapshot_times = to_list(k, v);
                                  },
                                  [](const RunConfig& c) { return join(c.snapshot_times); }};
    t["mode.kind"] = {[](RunConfig& c, std::string_view k, std::string_view v) {
                        if (v == "run") c.mode = RunMode::Run;
                        else if (v == "scenario") c.mode = RunMode::Scenario;
                        else if (v == "sweep") c.mode = RunMode::Sweep;
                        else if (v == "convergence") c.mode = RunMode::Convergence;
                        else throw ConfigError(std::string(k) + ": must be run, scenario, sweep or convergence");
                      },
                      [](const RunConfig& c) {
                        switch (c.mode) {
                          case RunMode::Run: return std::string("run");
                          case RunMode::Scenario: return std::string("scenario");
                          case RunMode::Sweep: return std::string("sweep");
                          case RunMode::Convergence: return std::string("convergence");
                        }
                        return std::string();
                      }};
    t["mode.scenario"] = {[](RunConfig& c, std::string_view, std::string_view v) {
                            c.scenario = std::string(v);
                          },
                          [](const RunConfig& c) { return c.scenario; }};
    t["mode.sweep_key"] = {[](RunConfig& c, std::string_view, std::string_view v) {
                             c.sweep_key = std::string(v);
                           },
                           [](const RunConfig& c) { return c.sweep_key; }};
    t["mode.sweep_values"] = {[](RunConfig& c, std::string_view k, std::string_view v) {
                                c.sweep_values = to_list(k, v);
                              },
                              [](const RunConfig& c) { return join(c.sweep_values); }};
    return t;
  }();
  return table;
}

// Re-raises a validation failure with the owning key in front.
template <class F>
void guarded(const char* key, F&& check) {
  try {
    check();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(key) + ": " + e.what());
  }
}

void validate_config(const RunConfig& c) {
  guarded("grid", [&] { (void)c.grid(); });
  guarded("params.nu", [&] { if (!(c.params.nu > 0.0)) throw ConfigError("nu must be > 0"); });
  guarded("params.epsilon", [&] { if (!(c.params.epsilon > 0.0)) throw ConfigError("epsilon must be > 0"); });
  guarded("params.a", [&] { if (!(c.params.a > 0.0)) throw ConfigError("a must be > 0"); });
  guarded("params.gamma", [&] { if (!(c.params.gamma >= 1.0)) throw ConfigError("gamma must be ≥ 1"); });
  guarded("params.lambda", [&] { c.params.validate(); });
  guarded("controls", [&] { c.controls.validate(); });
  guarded("run.t_end", [&] { if (!(c.t_end >= 0.0)) throw ConfigError("t_end must be >= 0"); });
  guarded("output.record_every", [&] {
    if (c.record_every < 1) throw ConfigError("record_every must be >= 1");
  });
  guarded("output.snapshot_times", [&] {
    for (double t : c.snapshot_times) {
      if (!(t >= 0.0 && t <= c.t_end)) throw ConfigError("snapshot times must lie in [0, t_end]");
    }
  });
  guarded("initial.amplitude", [&] {
    if (!(c.initial.amplitude >= 0.0)) throw ConfigError("amplitude must be >= 0");
  });
  if (c.mode == RunMode::Scenario) {
    guarded("mode.scenario", [&] {
      const auto names = scenario_names();
      if (std::ranges::find(names, c.scenario) == names.end()) {
        throw ConfigError("unknown scenario '" + c.scenario + "'");
      }
    });
  }
  if (c.mode == RunMode::Sweep) {
    guarded("mode.sweep_key", [&] {
      if (!registry().contains(c.sweep_key) || c.sweep_key.starts_with("mode.")) {
        throw ConfigError("unknown sweep key '" + c.sweep_key + "'");
      }
    });
    guarded("mode.sweep_values", [&] {
      if (c.sweep_values.empty()) throw ConfigError("sweep needs at least one value");
    });
  }
}

}  // namespace

InitialCondition InitialSpec::build() const {
  switch (kind) {
    case InitialKind::Constant: return base;
    case InitialKind::Perturbed: return PerturbedIC{base, modes};
    case InitialKind::Noise: return NoiseIC{base, amplitude, seed};
  }
  return base;
}

nsch::Scenario RunConfig::as_scenario() const {
  nsch::Scenario sc;
  sc.name = directory;
  sc.length = length;
  sc.cells = cells;
  sc.bc = bc;
  sc.params = params;
  sc.initial = initial.build();
  sc.controls = controls;
  sc.t_end = t_end;
  sc.record_every = record_every;
  return sc;
}

RunConfig parse_config(std::string_view text) {
  RunConfig config;
  std::map<std::string, int, std::less<>> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    std::string_view line = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
    pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    const std::string where = "line " + std::to_string(line_no);
    if (eq == std::string_view::npos) {
      throw ConfigError(where + ": expected 'section.key = value'");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.find('.') == std::string_view::npos) {
      throw ConfigError(where + ": key '" + std::string(key) + "' has no section");
    }
    const auto it = registry().find(key);
    if (it == registry().end()) {
      throw ConfigError(where + ": unknown key '" + std::string(key) + "'");
    }
    if (const auto prev = seen.find(key); prev != seen.end()) {
      throw ConfigError(where + ": duplicate key '" + std::string(key) + "' (first set on line " +
                        std::to_string(prev->second) + ")");
    }
    seen.emplace(std::string(key), line_no);
    try {
      it->second.set(config, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
  validate_config(config);
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string echo_config(const RunConfig& config) {
  std::string out;
  for (const auto& [key, entry] : registry()) {
    out += key;
    out += " = ";
    out += entry.get(config);
    out += '\n';
  }
  return out;
}

void set_config_value(RunConfig& config, std::string_view key, std::string_view value) {
  const auto it = registry().find(key);
  if (it == registry().end()) throw ConfigError("unknown key '" + std::string(key) + "'");
  it->second.set(config, key, value);
  validate_config(config);
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [key, entry] : registry()) keys.push_back(key);
  return keys;
}

}  // namespace nsch
