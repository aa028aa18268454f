#pragma once

// Interchange formats: trace CSV (`t,p_down`), fit JSON and oracle report JSON.
// Floats are written in shortest round-trip form so output is byte-reproducible.

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "nldeco/dynamics.hpp"
#include "nldeco/error.hpp"
#include "nldeco/inference.hpp"

namespace nldeco {

using Json = nlohmann::ordered_json;

inline std::string format_double(double value) {
  char buffer[64];
  const auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc{}) throw Error("format_double: conversion failed");
  return {buffer, end};
}

inline double parse_double(std::string_view text, std::size_t line) {
  double value = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size()) {
    throw DomainError("trace CSV line " + std::to_string(line) + ": malformed number '" + std::string(text) + "'");
  }
  return value;
}

struct TraceSamples {
  std::vector<double> times;
  std::vector<double> p_down;
  friend bool operator==(const TraceSamples&, const TraceSamples&) = default;
};

inline void write_trace_csv(std::ostream& out, std::span<const double> times, std::span<const double> p_down) {
  out << "t,p_down\n";
  for (std::size_t j = 0; j < times.size(); ++j) out << format_double(times[j]) << ',' << format_double(p_down[j]) << '\n';
}

inline void write_trace_csv(std::ostream& out, const PopulationTrace& trace) {
  write_trace_csv(out, trace.times, trace.p_down);
}

inline TraceSamples read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "t,p_down") throw DomainError("trace CSV: header must be 't,p_down'");
  TraceSamples samples;
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
      throw DomainError("trace CSV line " + std::to_string(number) + ": expected two fields");
    }
    samples.times.push_back(parse_double(std::string_view(line).substr(0, comma), number));
    samples.p_down.push_back(parse_double(std::string_view(line).substr(comma + 1), number));
  }
  return samples;
}

inline Json to_json(const DecayRateFit& fit) {
  Json rates = Json::array();
  for (const auto& r : fit.gamma_n) rates.push_back({{"n", r.n}, {"rate", r.rate}, {"stderr", r.stderr_}});
  Json out;
  out["gamma_n"] = std::move(rates);
  out["gamma0_hat"] = fit.gamma0_hat;
  out["nu_hat"] = std::isfinite(fit.nu_hat) ? Json(fit.nu_hat) : Json(nullptr);
  out["residual_norm"] = fit.residual_norm;
  out["converged"] = fit.converged;
  return out;
}

inline std::string dump(const Json& json) { return json.dump(2) + "\n"; }

}  // namespace nldeco
