#pragma once

// Mode dispatch for the command-line tool. Exit status: 0 success, 1 validation
// error, 2 numerical failure; errors are reported as one JSON object on `err`.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>
#include <vector>

#include "nldeco/config.hpp"
#include "nldeco/inference.hpp"
#include "nldeco/io.hpp"
#include "nldeco/oracle_report.hpp"
#include "nldeco/version.hpp"

namespace nldeco {

inline constexpr double kNistExponent = 0.7;
inline constexpr double kNistTolerance = 0.02;

struct RunContext {
  std::filesystem::path out_dir = ".";
  std::filesystem::path base_dir = ".";  // resolves relative input paths
  bool quiet = false;
  std::ostream* out = &std::cout;
  std::ostream* err = &std::cerr;
};

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error("cannot open " + path.string() + " for writing");
  file << content;
  if (!file) throw Error("failed writing " + path.string());
}

inline std::string trace_csv(const PopulationTrace& trace) {
  std::ostringstream s;
  write_trace_csv(s, trace);
  return s.str();
}

inline Json trace_meta(const RunConfig& config, const PopulationTrace& trace) {
  Json meta;
  meta["library_version"] = kVersion;
  meta["config"] = to_json(config);
  meta["samples"] = trace.times.size();
  meta["cutoff"] = trace.distribution.cutoff();
  return meta;
}

inline std::string per_level_csv(const DecayRateFit& fit, const MotionalDistribution& dist) {
  std::ostringstream s;
  s << "n,p_n,rate,stderr,power_law_rate,relative_residual\n";
  for (const auto& r : fit.gamma_n) {
    const double law = fit.gamma0_hat * std::pow(r.n + 1.0, fit.nu_hat);
    const double rel = law > 0.0 ? (r.rate - law) / law : 0.0;
    s << r.n << ',' << format_double(dist.probabilities()[static_cast<std::size_t>(r.n)]) << ','
      << format_double(r.rate) << ',' << format_double(r.stderr_) << ',' << format_double(law) << ','
      << format_double(rel) << '\n';
  }
  return s.str();
}

inline std::string stem(const RunConfig& config, const char* fallback) {
  return config.name.empty() ? fallback : config.name;
}

inline RunConfig with_sweep_value(RunConfig config, double value) {
  if (config.sweep.parameter == "d") config.model = config.model.with_d(value);
  if (config.sweep.parameter == "gamma0") config.model = config.model.with_gamma0(value);
  if (config.sweep.parameter == "g") config.model = config.model.with_g(value);
  return config;
}

inline PopulationTrace simulate(const RunConfig& config) {
  const auto spec = config.spectral.build(config.model);
  const auto dist = config.distribution.build();
  const auto times = config.time_grid.build();
  return population_trace(config.model, spec, dist, times, config.quadrature);
}

inline int run_simulate(const RunConfig& config, const RunContext& ctx) {
  const auto trace = simulate(config);
  const auto name = stem(config, "trace");
  write_file(ctx.out_dir / (name + ".csv"), trace_csv(trace));
  write_file(ctx.out_dir / (name + ".meta.json"), dump(trace_meta(config, trace)));
  if (!ctx.quiet) *ctx.out << "wrote " << trace.times.size() << " samples to " << (ctx.out_dir / (name + ".csv")).string() << "\n";
  return 0;
}

inline int run_fit(const RunConfig& config, const RunContext& ctx) {
  std::filesystem::path input = config.input_trace;
  if (input.is_relative()) input = ctx.base_dir / input;
  std::ifstream file(input);
  if (!file) throw ConfigError("input.trace: cannot open " + input.string());
  auto samples = read_trace_csv(file);
  const auto dist = config.distribution.build();
  PopulationTrace trace{std::move(samples.times), std::move(samples.p_down), config.model,
                        config.spectral.build(config.model), dist};
  const auto fit = fit_full_model(trace, dist, config.model.g(), config.fit);
  const auto name = stem(config, "fit");
  write_file(ctx.out_dir / (name + ".fit.json"), dump(to_json(fit)));
  write_file(ctx.out_dir / (name + ".residuals.csv"), per_level_csv(fit, dist));
  if (!ctx.quiet) {
    *ctx.out << "nu_hat=" << format_double(fit.nu_hat) << " gamma0_hat=" << format_double(fit.gamma0_hat)
             << " residual_norm=" << format_double(fit.residual_norm) << "\n";
  }
  return 0;
}

inline int run_oracle(const RunConfig& config, const RunContext& ctx) {
  const auto report = run_oracle_checks(config.model, config.oracle);
  const auto name = stem(config, "oracle");
  write_file(ctx.out_dir / (name + ".oracle.json"), dump(to_json(report)));
  bool all = true;
  for (const auto& p : report) {
    all = all && p.pass;
    if (!ctx.quiet) {
      *ctx.out << (p.pass ? "PASS " : "FAIL ") << p.property << " max_residual=" << format_double(p.max_residual)
               << " tolerance=" << format_double(p.tolerance) << "\n";
    }
  }
  return all ? 0 : 2;
}

struct SweepOutcome {
  std::optional<DecayRateFit> fit;
  std::exception_ptr error;
};

inline int run_sweep(const RunConfig& config, const RunContext& ctx) {
  const auto& values = config.sweep.values;
  std::vector<SweepOutcome> outcomes(values.size());
  const auto name = stem(config, "sweep");

  unsigned workers = config.workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : config.workers;
  workers = std::min<unsigned>(workers, static_cast<unsigned>(values.size()));
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < values.size(); k = next++) {
          try {
            const auto point = with_sweep_value(config, values[k]);
            const auto trace = simulate(point);
            const auto fit = fit_full_model(trace, trace.distribution, point.model.g(), point.fit);
            const auto file = name + "_" + std::to_string(k);
            write_file(ctx.out_dir / (file + ".csv"), trace_csv(trace));
            write_file(ctx.out_dir / (file + ".meta.json"), dump(trace_meta(point, trace)));
            write_file(ctx.out_dir / (file + ".fit.json"), dump(to_json(fit)));
            outcomes[k].fit = fit;
          } catch (...) {
            outcomes[k].error = std::current_exception();
          }
        }
      });
    }
  }

  for (const auto& o : outcomes) {
    if (o.error) std::rethrow_exception(o.error);
  }
  std::ostringstream summary;
  summary << config.sweep.parameter << ",nu_hat,gamma0_hat,residual_norm,converged\n";
  for (std::size_t k = 0; k < values.size(); ++k) {
    const auto& fit = *outcomes[k].fit;
    summary << format_double(values[k]) << ',' << format_double(fit.nu_hat) << ',' << format_double(fit.gamma0_hat)
            << ',' << format_double(fit.residual_norm) << ',' << (fit.converged ? "true" : "false") << '\n';
  }
  write_file(ctx.out_dir / (name + ".sweep.csv"), summary.str());
  if (!ctx.quiet) *ctx.out << summary.str();
  return 0;
}

inline int run_reproduce_nist(const RunConfig& config, const RunContext& ctx) {
  const auto trace = simulate(config);
  const auto fit = fit_full_model(trace, trace.distribution, config.model.g(), config.fit);
  const auto name = stem(config, "nist");
  write_file(ctx.out_dir / (name + ".csv"), trace_csv(trace));
  write_file(ctx.out_dir / (name + ".meta.json"), dump(trace_meta(config, trace)));
  write_file(ctx.out_dir / (name + ".fit.json"), dump(to_json(fit)));
  const double deviation = fit.nu_hat - kNistExponent;
  const bool within = std::fabs(deviation) <= kNistTolerance;
  *ctx.out << "reproduce-nist: d=" << format_double(config.model.d()) << " nu_hat=" << format_double(fit.nu_hat)
           << " gamma0_hat=" << format_double(fit.gamma0_hat) << " target_nu=0.7 deviation="
           << format_double(deviation) << " within_0.02=" << (within ? "true" : "false") << "\n";
  return 0;
}

inline void report_error(const RunContext& ctx, const char* kind, const std::exception& e) {
  Json error{{"error", {{"kind", kind}, {"message", e.what()}}}};
  *ctx.err << error.dump() << "\n";
}

}  // namespace detail

inline int run(const RunConfig& config, const RunContext& ctx = {}) {
  try {
    std::filesystem::create_directories(ctx.out_dir);
    switch (config.mode) {
      case Mode::Simulate: return detail::run_simulate(config, ctx);
      case Mode::Fit: return detail::run_fit(config, ctx);
      case Mode::OracleCheck: return detail::run_oracle(config, ctx);
      case Mode::Sweep: return detail::run_sweep(config, ctx);
      case Mode::ReproduceNist: return detail::run_reproduce_nist(config, ctx);
    }
    return 1;
  } catch (const DomainError& e) {
    detail::report_error(ctx, "validation", e);
    return 1;
  } catch (const NumericalError& e) {
    detail::report_error(ctx, "numerical", e);
    return 2;
  } catch (const std::exception& e) {
    detail::report_error(ctx, "io", e);
    return 2;
  }
}

}  // namespace nldeco
