#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "nldeco/config.hpp"
#include "nldeco/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Nonlinear dephasing model of a trapped ion: simulate, fit, verify"};
  std::string mode_text;
  std::string config_path;
  std::string out_dir = ".";
  bool quiet = false;
  app.add_option("mode", mode_text, "simulate | fit | oracle-check | sweep | reproduce-nist")
      ->required()
      ->check(CLI::IsMember({"simulate", "fit", "oracle-check", "sweep", "reproduce-nist"}));
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--out", out_dir, "output directory");
  app.add_flag("--quiet", quiet, "suppress progress output");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  nldeco::RunContext ctx;
  ctx.out_dir = out_dir;
  ctx.quiet = quiet;
  const auto mode = *nldeco::parse_mode(mode_text);
  try {
    std::string text = "{}";
    if (!config_path.empty()) {
      std::ifstream file(config_path);
      if (!file) throw nldeco::ConfigError("cannot open config " + config_path);
      std::ostringstream buffer;
      buffer << file.rdbuf();
      text = buffer.str();
      ctx.base_dir = std::filesystem::path(config_path).parent_path();
      if (ctx.base_dir.empty()) ctx.base_dir = ".";
    } else if (mode != nldeco::Mode::ReproduceNist) {
      throw nldeco::ConfigError("--config is required for mode " + mode_text);
    }
    const auto config = nldeco::parse_config(text, mode);
    return nldeco::run(config, ctx);
  } catch (const nldeco::DomainError& e) {
    std::cerr << nldeco::Json{{"error", {{"kind", "validation"}, {"message", e.what()}}}}.dump() << "\n";
    return 1;
  }
}
