#pragma once

// Run configuration: a JSON document validated into RunConfig. Unknown keys,
// duplicate keys and invariant violations are rejected with the field path.

#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "nldeco/distribution.hpp"
#include "nldeco/dynamics.hpp"
#include "nldeco/inference.hpp"
#include "nldeco/io.hpp"
#include "nldeco/model.hpp"
#include "nldeco/oracle_report.hpp"
#include "nldeco/quadrature.hpp"
#include "nldeco/reservoir.hpp"

namespace nldeco {

class ConfigError : public DomainError {
 public:
  using DomainError::DomainError;
};

enum class Mode { Simulate, Fit, OracleCheck, Sweep, ReproduceNist };

inline std::optional<Mode> parse_mode(std::string_view name) {
  if (name == "simulate") return Mode::Simulate;
  if (name == "fit") return Mode::Fit;
  if (name == "oracle-check") return Mode::OracleCheck;
  if (name == "sweep") return Mode::Sweep;
  if (name == "reproduce-nist") return Mode::ReproduceNist;
  return std::nullopt;
}

inline const char* mode_name(Mode mode) {
  switch (mode) {
    case Mode::Simulate: return "simulate";
    case Mode::Fit: return "fit";
    case Mode::OracleCheck: return "oracle-check";
    case Mode::Sweep: return "sweep";
    case Mode::ReproduceNist: return "reproduce-nist";
  }
  return "";
}

struct SpectralConfig {
  enum class Family { PaperFlat, Ohmic, Discrete } family = Family::PaperFlat;
  std::optional<double> gamma0;  // paper_flat; defaults to model.gamma0
  double alpha = 0.0;
  double omega_c = 1.0;
  std::vector<ReservoirMode> modes;

  SpectralDensitySpec build(const ModelParams& model) const {
    switch (family) {
      case Family::PaperFlat: return SpectralDensitySpec::paper_flat(gamma0.value_or(model.gamma0()));
      case Family::Ohmic: return SpectralDensitySpec::ohmic(alpha, omega_c);
      case Family::Discrete: return SpectralDensitySpec::discrete(modes);
    }
    throw ConfigError("spectral.family: unknown");
  }
};

struct DistributionConfig {
  DistributionKind kind = CoherentKind{3.0};
  std::optional<int> cutoff;
  double tail_tolerance = kDefaultTailTolerance;

  MotionalDistribution build() const { return make_distribution(kind, cutoff, tail_tolerance); }
};

struct TimeGridConfig {
  double start = 0.0;
  double stop = 40.0;
  std::size_t count = 1000;
  std::vector<double> values;  // explicit grid, overrides start/stop/count

  std::vector<double> build() const { return values.empty() ? linear_grid(start, stop, count) : values; }
};

struct SweepConfig {
  std::string parameter = "d";
  std::vector<double> values;
};

struct RunConfig {
  Mode mode = Mode::ReproduceNist;
  ModelParams model{1.0, -0.15, 0.1};
  SpectralConfig spectral;
  DistributionConfig distribution;
  TimeGridConfig time_grid;
  FitOptions fit;
  SweepConfig sweep;
  OracleSettings oracle;
  QuadratureOptions quadrature;
  std::string input_trace;
  std::string name;
  unsigned workers = 0;  // 0: available parallelism
};

namespace detail {

inline std::string join_path(const std::string& parent, const std::string& key) {
  return parent.empty() ? key : parent + "." + key;
}

class Section {
 public:
  Section(const Json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(where() + "expected an object");
  }

  void allow(std::initializer_list<const char*> keys) const {
    std::set<std::string> known(keys.begin(), keys.end());
    for (const auto& [key, value] : node_.items()) {
      if (!known.count(key)) throw ConfigError(join_path(path_, key) + ": unknown key");
    }
  }

  bool has(const char* key) const { return node_.contains(key); }

  const Json& at(const char* key) const {
    if (!node_.contains(key)) throw ConfigError(join_path(path_, key) + ": required field missing");
    return node_.at(key);
  }

  double number(const char* key) const {
    const auto& v = at(key);
    if (!v.is_number()) throw ConfigError(join_path(path_, key) + ": expected a number");
    return v.get<double>();
  }

  double number_or(const char* key, double fallback) const { return has(key) ? number(key) : fallback; }

  long long integer(const char* key) const {
    const auto& v = at(key);
    if (!v.is_number_integer()) throw ConfigError(join_path(path_, key) + ": expected an integer");
    return v.get<long long>();
  }

  std::string string(const char* key) const {
    const auto& v = at(key);
    if (!v.is_string()) throw ConfigError(join_path(path_, key) + ": expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const char* key) const {
    const auto& v = at(key);
    if (!v.is_array()) throw ConfigError(join_path(path_, key) + ": expected an array of numbers");
    std::vector<double> out;
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (!v[k].is_number()) throw ConfigError(field(key, k) + ": expected a number");
      out.push_back(v[k].get<double>());
    }
    return out;
  }

  Section child(const char* key) const { return Section(at(key), join_path(path_, key)); }
  std::string field(const char* key) const { return join_path(path_, key); }
  std::string field(const char* key, std::size_t index) const {
    return join_path(path_, key) + "[" + std::to_string(index) + "]";
  }
  const std::string& path() const noexcept { return path_; }

 private:
  std::string where() const { return path_.empty() ? "config: " : path_ + ": "; }
  const Json& node_;
  std::string path_;
};

// Rewrites library DomainErrors raised while building a section with its path.
template <class F>
auto guarded(const std::string& path, F&& build) {
  try {
    return build();
  } catch (const ConfigError&) {
    throw;
  } catch (const DomainError& e) {
    const std::string message = e.what();
    if (message.rfind(path, 0) == 0) throw ConfigError(message);
    throw ConfigError(path + ": " + message);
  }
}

inline InverseTemperature parse_beta(const Json& v, const std::string& path) {
  if (v.is_string() && v.get<std::string>() == "zero") return InverseTemperature::zero_temperature();
  if (!v.is_number()) throw ConfigError(path + ": expected \"zero\" or a positive number");
  return guarded(path, [&] { return InverseTemperature::finite(v.get<double>()); });
}

inline std::vector<ReservoirMode> parse_modes(const Section& s, const char* key) {
  const auto& v = s.at(key);
  if (!v.is_array()) throw ConfigError(s.field(key) + ": expected an array of {omega, c}");
  std::vector<ReservoirMode> modes;
  for (std::size_t k = 0; k < v.size(); ++k) {
    const Section mode(v[k], s.field(key, k));
    mode.allow({"omega", "c"});
    modes.push_back({mode.number("omega"), mode.number("c")});
    if (!(modes.back().omega > 0.0)) throw ConfigError(mode.field("omega") + ": must be > 0");
  }
  return modes;
}

inline Json parse_json_strict(std::string_view text) {
  // Tracks the key set of every open object to reject duplicates.
  std::vector<std::set<std::string>> open;
  auto callback = [&open](int, Json::parse_event_t event, Json& parsed) {
    switch (event) {
      case Json::parse_event_t::object_start: open.emplace_back(); break;
      case Json::parse_event_t::object_end: open.pop_back(); break;
      case Json::parse_event_t::key: {
        const auto key = parsed.get<std::string>();
        if (!open.back().insert(key).second) throw ConfigError("duplicate key '" + key + "'");
        break;
      }
      default: break;
    }
    return true;
  };
  try {
    return Json::parse(text.begin(), text.end(), callback);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("syntax error: ") + e.what());
  }
}

}  // namespace detail

/// Parses and validates a configuration for `mode`. A "mode" key in the document,
/// when present, must agree with the requested mode.
inline RunConfig parse_config(std::string_view text, Mode mode) {
  const Json doc = detail::parse_json_strict(text);
  const detail::Section root(doc, "");
  root.allow({"mode", "model", "spectral", "distribution", "time_grid", "fit", "sweep", "oracle", "quadrature",
              "input", "output", "workers"});

  RunConfig config;
  config.mode = mode;
  if (root.has("mode")) {
    const auto declared = parse_mode(root.string("mode"));
    if (!declared) throw ConfigError("mode: unknown mode '" + root.string("mode") + "'");
    if (*declared != mode) {
      throw ConfigError(std::string("mode: config declares '") + mode_name(*declared) + "' but '" +
                        mode_name(mode) + "' was requested");
    }
  }
  const bool defaults = mode == Mode::ReproduceNist;
  auto required = [&](const char* key) {
    if (!defaults && !root.has(key)) throw ConfigError(std::string(key) + ": required for mode " + mode_name(mode));
  };

  required("model");
  if (root.has("model")) {
    const auto s = root.child("model");
    s.allow({"g", "d", "gamma0", "beta"});
    const InverseTemperature beta =
        s.has("beta") ? detail::parse_beta(s.at("beta"), s.field("beta")) : InverseTemperature::zero_temperature();
    const double g = defaults ? s.number_or("g", config.model.g()) : s.number("g");
    const double d = (defaults || mode == Mode::Fit) ? s.number_or("d", config.model.d()) : s.number("d");
    const double gamma0 = s.number_or("gamma0", defaults ? config.model.gamma0() : 0.0);
    if (!(d > -0.5)) throw ConfigError("model.d: must be > -0.5 (exponent 2d+1 must be positive), got " + format_double(d));
    config.model = detail::guarded("model", [&] { return ModelParams(g, d, gamma0, beta); });
  }

  if (mode == Mode::Simulate || mode == Mode::Sweep) required("spectral");
  if (root.has("spectral")) {
    const auto s = root.child("spectral");
    s.allow({"family", "gamma0", "alpha", "omega_c", "modes"});
    const auto family = s.string("family");
    if (family == "paper_flat") {
      config.spectral.family = SpectralConfig::Family::PaperFlat;
      if (s.has("gamma0")) config.spectral.gamma0 = s.number("gamma0");
    } else if (family == "ohmic") {
      config.spectral.family = SpectralConfig::Family::Ohmic;
      config.spectral.alpha = s.number("alpha");
      config.spectral.omega_c = s.number("omega_c");
    } else if (family == "discrete") {
      config.spectral.family = SpectralConfig::Family::Discrete;
      config.spectral.modes = detail::parse_modes(s, "modes");
    } else {
      throw ConfigError("spectral.family: expected paper_flat, ohmic or discrete, got '" + family + "'");
    }
    detail::guarded("spectral", [&] { return config.spectral.build(config.model); });
  }

  if (mode != Mode::OracleCheck) required("distribution");
  if (root.has("distribution")) {
    const auto s = root.child("distribution");
    s.allow({"kind", "n0", "mean", "cutoff", "tail_tolerance"});
    const auto kind = s.string("kind");
    if (kind == "fock") {
      const auto n0 = s.integer("n0");
      if (n0 < 0 || n0 > kMaxAutoCutoff) throw ConfigError("distribution.n0: must be in [0, 200]");
      config.distribution.kind = FockKind{static_cast<int>(n0)};
    } else if (kind == "coherent") {
      config.distribution.kind = CoherentKind{s.number("mean")};
    } else if (kind == "thermal") {
      config.distribution.kind = ThermalKind{s.number("mean")};
    } else {
      throw ConfigError("distribution.kind: expected fock, coherent or thermal, got '" + kind + "'");
    }
    if (s.has("cutoff")) {
      const auto cutoff = s.integer("cutoff");
      if (cutoff < 0 || cutoff > 10'000) throw ConfigError("distribution.cutoff: must be in [0, 10000]");
      config.distribution.cutoff = static_cast<int>(cutoff);
    }
    config.distribution.tail_tolerance = s.number_or("tail_tolerance", kDefaultTailTolerance);
    detail::guarded("distribution", [&] { return config.distribution.build(); });
  }

  if (mode == Mode::Simulate || mode == Mode::Sweep) required("time_grid");
  if (root.has("time_grid")) {
    const auto s = root.child("time_grid");
    s.allow({"start", "stop", "count", "values"});
    if (s.has("values")) {
      if (s.has("start") || s.has("stop") || s.has("count")) {
        throw ConfigError("time_grid: give either values or start/stop/count, not both");
      }
      config.time_grid.values = s.numbers("values");
      const auto& v = config.time_grid.values;
      if (v.empty() || !(v.front() >= 0.0)) throw ConfigError("time_grid.values: must be non-empty and start at t >= 0");
      for (std::size_t k = 1; k < v.size(); ++k) {
        if (!(v[k] > v[k - 1])) throw ConfigError("time_grid.values: must be strictly increasing");
      }
    } else {
      config.time_grid.start = s.number_or("start", 0.0);
      config.time_grid.stop = s.number("stop");
      const auto count = s.integer("count");
      if (count < 2) throw ConfigError("time_grid.count: must be >= 2");
      config.time_grid.count = static_cast<std::size_t>(count);
      if (!(config.time_grid.start >= 0.0)) throw ConfigError("time_grid.start: must be >= 0");
      if (!(config.time_grid.stop > config.time_grid.start)) throw ConfigError("time_grid.stop: must exceed start");
    }
  }

  if (root.has("fit")) {
    const auto s = root.child("fit");
    s.allow({"p_min", "max_iterations", "tolerance"});
    config.fit.p_min = s.number_or("p_min", config.fit.p_min);
    if (!(config.fit.p_min >= 0.0 && config.fit.p_min < 1.0)) throw ConfigError("fit.p_min: must be in [0, 1)");
    if (s.has("max_iterations")) {
      const auto iterations = s.integer("max_iterations");
      if (iterations < 1) throw ConfigError("fit.max_iterations: must be >= 1");
      config.fit.lm.max_iterations = static_cast<int>(iterations);
    }
    config.fit.lm.relative_tolerance = s.number_or("tolerance", config.fit.lm.relative_tolerance);
    if (!(config.fit.lm.relative_tolerance > 0.0)) throw ConfigError("fit.tolerance: must be > 0");
  }

  if (mode == Mode::Sweep) required("sweep");
  if (root.has("sweep")) {
    const auto s = root.child("sweep");
    s.allow({"parameter", "values"});
    config.sweep.parameter = s.string("parameter");
    if (config.sweep.parameter != "d" && config.sweep.parameter != "gamma0" && config.sweep.parameter != "g") {
      throw ConfigError("sweep.parameter: expected d, gamma0 or g");
    }
    config.sweep.values = s.numbers("values");
    if (config.sweep.values.empty()) throw ConfigError("sweep.values: must not be empty");
    for (std::size_t k = 0; k < config.sweep.values.size(); ++k) {
      const double v = config.sweep.values[k];
      const auto field = s.field("values", k);
      if (config.sweep.parameter == "d" && !(v > -0.5)) throw ConfigError(field + ": d must be > -0.5");
      if (config.sweep.parameter == "gamma0" && !(v >= 0.0)) throw ConfigError(field + ": gamma0 must be >= 0");
      if (config.sweep.parameter == "g" && !(v > 0.0)) throw ConfigError(field + ": g must be > 0");
    }
  }

  if (mode == Mode::OracleCheck) required("oracle");
  if (root.has("oracle")) {
    const auto s = root.child("oracle");
    s.allow({"modes", "fock_cutoff", "temperatures", "levels", "t_max", "t_count", "counter_term"});
    config.oracle.modes = detail::parse_modes(s, "modes");
    if (config.oracle.modes.empty() || config.oracle.modes.size() > 4) {
      throw ConfigError("oracle.modes: needs between 1 and 4 modes");
    }
    if (s.has("fock_cutoff")) {
      const auto cutoff = s.integer("fock_cutoff");
      if (cutoff < 10 || cutoff > 200) throw ConfigError("oracle.fock_cutoff: must be in [10, 200]");
      config.oracle.fock_cutoff = static_cast<int>(cutoff);
    }
    if (s.has("temperatures")) {
      const auto& v = s.at("temperatures");
      if (!v.is_array() || v.empty()) throw ConfigError("oracle.temperatures: expected a non-empty array");
      config.oracle.temperatures.clear();
      for (std::size_t k = 0; k < v.size(); ++k) {
        config.oracle.temperatures.push_back(detail::parse_beta(v[k], s.field("temperatures", k)));
      }
    }
    if (s.has("levels")) {
      const auto& v = s.at("levels");
      if (!v.is_array()) throw ConfigError("oracle.levels: expected an array of integers");
      config.oracle.levels.clear();
      for (std::size_t k = 0; k < v.size(); ++k) {
        if (!v[k].is_number_integer() || v[k].get<int>() < 0) {
          throw ConfigError(s.field("levels", k) + ": expected an integer >= 0");
        }
        config.oracle.levels.push_back(v[k].get<int>());
      }
    }
    config.oracle.t_max = s.number_or("t_max", config.oracle.t_max);
    if (!(config.oracle.t_max > 0.0)) throw ConfigError("oracle.t_max: must be > 0");
    if (s.has("t_count")) {
      const auto count = s.integer("t_count");
      if (count < 2) throw ConfigError("oracle.t_count: must be >= 2");
      config.oracle.t_count = static_cast<std::size_t>(count);
    }
    if (s.has("counter_term")) {
      const auto term = s.string("counter_term");
      if (term == "energy_consistent") {
        config.oracle.counter_term = CounterTerm::EnergyConsistent;
      } else if (term == "as_printed") {
        config.oracle.counter_term = CounterTerm::AsPrinted;
      } else {
        throw ConfigError("oracle.counter_term: expected energy_consistent or as_printed");
      }
    }
  }

  if (root.has("quadrature")) {
    const auto s = root.child("quadrature");
    s.allow({"abs_tol", "rel_tol", "max_intervals"});
    config.quadrature.abs_tol = s.number_or("abs_tol", config.quadrature.abs_tol);
    config.quadrature.rel_tol = s.number_or("rel_tol", config.quadrature.rel_tol);
    if (!(config.quadrature.abs_tol > 0.0)) throw ConfigError("quadrature.abs_tol: must be > 0");
    if (!(config.quadrature.rel_tol > 0.0)) throw ConfigError("quadrature.rel_tol: must be > 0");
    if (s.has("max_intervals")) {
      const auto n = s.integer("max_intervals");
      if (n < 1) throw ConfigError("quadrature.max_intervals: must be >= 1");
      config.quadrature.max_intervals = static_cast<std::size_t>(n);
    }
  }

  if (mode == Mode::Fit) required("input");
  if (root.has("input")) {
    const auto s = root.child("input");
    s.allow({"trace"});
    config.input_trace = s.string("trace");
  }

  if (root.has("output")) {
    const auto s = root.child("output");
    s.allow({"name"});
    config.name = s.string("name");
    if (config.name.empty() || config.name.find('/') != std::string::npos) {
      throw ConfigError("output.name: must be a non-empty file stem without '/'");
    }
  }

  if (root.has("workers")) {
    const auto workers = root.integer("workers");
    if (workers < 0) throw ConfigError("workers: must be >= 0");
    config.workers = static_cast<unsigned>(workers);
  }
  return config;
}

inline Json beta_json(InverseTemperature beta) {
  return beta.is_zero_temperature() ? Json("zero") : Json(beta.value());
}

/// Normalized echo of a configuration, used in sidecar metadata.
inline Json to_json(const RunConfig& config) {
  Json out;
  out["mode"] = mode_name(config.mode);
  out["model"] = {{"g", config.model.g()},
                  {"d", config.model.d()},
                  {"gamma0", config.model.gamma0()},
                  {"beta", beta_json(config.model.beta())}};
  Json spectral;
  switch (config.spectral.family) {
    case SpectralConfig::Family::PaperFlat:
      spectral["family"] = "paper_flat";
      spectral["gamma0"] = config.spectral.gamma0.value_or(config.model.gamma0());
      break;
    case SpectralConfig::Family::Ohmic:
      spectral["family"] = "ohmic";
      spectral["alpha"] = config.spectral.alpha;
      spectral["omega_c"] = config.spectral.omega_c;
      break;
    case SpectralConfig::Family::Discrete: {
      spectral["family"] = "discrete";
      Json modes = Json::array();
      for (const auto& m : config.spectral.modes) modes.push_back({{"omega", m.omega}, {"c", m.coupling}});
      spectral["modes"] = std::move(modes);
      break;
    }
  }
  out["spectral"] = std::move(spectral);
  Json dist;
  std::visit(
      [&](const auto& kind) {
        using T = std::decay_t<decltype(kind)>;
        if constexpr (std::is_same_v<T, FockKind>) {
          dist["kind"] = "fock";
          dist["n0"] = kind.n0;
        } else if constexpr (std::is_same_v<T, CoherentKind>) {
          dist["kind"] = "coherent";
          dist["mean"] = kind.mean;
        } else {
          dist["kind"] = "thermal";
          dist["mean"] = kind.mean;
        }
      },
      config.distribution.kind);
  if (config.distribution.cutoff) dist["cutoff"] = *config.distribution.cutoff;
  dist["tail_tolerance"] = config.distribution.tail_tolerance;
  out["distribution"] = std::move(dist);
  if (config.time_grid.values.empty()) {
    out["time_grid"] = {{"start", config.time_grid.start}, {"stop", config.time_grid.stop},
                        {"count", config.time_grid.count}};
  } else {
    out["time_grid"] = {{"values", config.time_grid.values}};
  }
  out["fit"] = {{"p_min", config.fit.p_min},
                {"max_iterations", config.fit.lm.max_iterations},
                {"tolerance", config.fit.lm.relative_tolerance}};
  out["quadrature"] = {{"abs_tol", config.quadrature.abs_tol},
                       {"rel_tol", config.quadrature.rel_tol},
                       {"max_intervals", config.quadrature.max_intervals}};
  if (!config.sweep.values.empty()) {
    out["sweep"] = {{"parameter", config.sweep.parameter}, {"values", config.sweep.values}};
  }
  if (!config.input_trace.empty()) out["input"] = {{"trace", config.input_trace}};
  return out;
}

}  // namespace nldeco
