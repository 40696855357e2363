#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "psdprobe/harness.hpp"

using namespace psdprobe;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNonSeparation = 3;

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    size_t used = 0;
    double v = std::stod(item, &used);
    if (used != item.size()) throw ConfigError("bad list entry '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

double parse_p(const std::string& s) {
  if (s == "inf" || s == "infinity") return INFINITY;
  return std::stod(s);
}

void emit(const std::string& out_dir, const std::string& name, const std::string& text) {
  if (out_dir.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::filesystem::create_directories(out_dir);
  std::ofstream(out_dir + "/" + name) << text << (text.back() == '\n' ? "" : "\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Query-counted PSD testing experiments"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  int trials = 0;
  std::string out_dir;
  std::string format = "csv";
  int threads = 0;
  std::string constants_path;
  auto shared = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "Base seed");
    sub->add_option("--trials", trials, "Number of trials (overrides config)");
    sub->add_option("--out", out_dir, "Output directory (stdout if omitted)");
    sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--threads", threads, "Worker threads (0: all cores)");
    sub->add_option("--constants", constants_path, "JSON file of constant overrides");
  };

  auto* run = app.add_subcommand("run", "Run an experiment from a JSON config");
  std::string config_path;
  bool no_timing = false;
  run->add_option("--config", config_path, "Experiment config (JSON)")->required();
  run->add_flag("--no-timing", no_timing, "Write wall_time_ms as 0 for byte-stable output");
  shared(run);

  auto* cal = app.add_subcommand("calibrate", "Calibrate a named constant");
  std::string suite;
  cal->add_option("--suite", suite, "c_psd|kappa_sketch|kappa_oja|kappa_krylov|kappa_na|kappa_mv|embed_rows")
      ->required();
  shared(cal);

  auto* sc = app.add_subcommand("scaling", "Minimal query budget per (eps, d) and slope fits");
  std::string tester, p_str = "1", eps_str, dims_str;
  sc->add_option("--tester", tester, "oja_l1|nonadaptive_l1|krylov|nonadaptive_mv")->required();
  sc->add_option("--p", p_str, "Schatten p (number or inf)");
  sc->add_option("--eps", eps_str, "Comma-separated eps list")->required();
  sc->add_option("--dims", dims_str, "Comma-separated dimension list")->required();
  shared(sc);

  CLI11_PARSE(app, argc, argv);

  try {
    Constants base;
    if (!constants_path.empty()) {
      try {
        base = Constants::load(constants_path);
      } catch (const std::exception& e) {
        throw ConfigError(e.what());
      }
    }

    if (run->parsed()) {
      std::ifstream in(config_path);
      if (!in) throw ConfigError("cannot open config " + config_path);
      std::stringstream buf;
      buf << in.rdbuf();
      ExperimentConfig cfg = ExperimentConfig::from_json(buf.str());
      if (trials > 0) cfg.trials = trials;
      if (run->count("--seed")) cfg.seed0 = seed;
      if (run->count("--format")) cfg.format = format;
      if (!constants_path.empty()) cfg.constants = base;
      if (no_timing) cfg.timing = false;
      if (threads > 0) cfg.threads = threads;
      std::string dir = !out_dir.empty() ? out_dir : cfg.output_path;
      ExperimentResult res = run_experiment(cfg);
      if (dir.empty()) {
        std::cout << records_csv(res.records) << res.summary_json << '\n';
      } else {
        write_outputs(res, dir, cfg.format);
        std::cerr << "wrote " << dir << '\n';
      }
      return 0;
    }

    if (cal->parsed()) {
      CalibrationResult res = calibrate(parse_suite(suite), seed, trials > 0 ? trials : 40, base);
      emit(out_dir, "calibration_" + suite + ".json", res.report_json);
      if (!res.separated) {
        std::cerr << "calibration suite " << suite << " did not separate; see report\n";
        return kExitNonSeparation;
      }
      return 0;
    }

    if (sc->parsed()) {
      std::vector<Index> dims;
      for (double d : parse_list(dims_str)) {
        if (d < 2 || d != std::floor(d)) throw ConfigError("dims must be integers >= 2");
        dims.push_back(static_cast<Index>(d));
      }
      ScalingTable tab = scaling_report(parse_tester(tester), parse_p(p_str), parse_list(eps_str),
                                        dims, trials > 0 ? trials : 50, seed, base);
      emit(out_dir, "scaling_" + tester + (format == "json" ? ".json" : ".csv"),
           format == "json" ? tab.to_json() : tab.to_csv());
      if (format == "csv") {
        if (tab.slope_eps) std::cerr << "slope vs 1/eps: " << *tab.slope_eps << '\n';
        if (tab.slope_d) std::cerr << "slope vs d: " << *tab.slope_d << '\n';
      }
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ContractViolation& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
