#include "psdprobe/harness.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

#include "psdprobe/kernels.hpp"
#include "psdprobe/mv_testers.hpp"
#include "psdprobe/spectrum.hpp"
#include "psdprobe/vmv_testers.hpp"

namespace psdprobe {

using nlohmann::json;

namespace {

const std::vector<std::pair<TesterKind, std::string>>& tester_names() {
  static const std::vector<std::pair<TesterKind, std::string>> names{
      {TesterKind::oja_l1, "oja_l1"},
      {TesterKind::bilinear_sketch, "bilinear_sketch"},
      {TesterKind::adaptive_l2, "adaptive_l2"},
      {TesterKind::nonadaptive_l1, "nonadaptive_l1"},
      {TesterKind::krylov, "krylov"},
      {TesterKind::nonadaptive_mv, "nonadaptive_mv"},
      {TesterKind::spectrum, "spectrum"},
      {TesterKind::spectrum_adaptive, "spectrum_adaptive"}};
  return names;
}

const std::vector<std::pair<CalibrationSuite, std::string>>& suite_names() {
  static const std::vector<std::pair<CalibrationSuite, std::string>> names{
      {CalibrationSuite::c_psd, "c_psd"},
      {CalibrationSuite::kappa_sketch, "kappa_sketch"},
      {CalibrationSuite::kappa_oja, "kappa_oja"},
      {CalibrationSuite::kappa_krylov, "kappa_krylov"},
      {CalibrationSuite::kappa_na, "kappa_na"},
      {CalibrationSuite::kappa_mv, "kappa_mv"},
      {CalibrationSuite::embed_rows, "embed_rows"}};
  return names;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_p(const json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf" || s == "infinity") return INFINITY;
    throw ConfigError("p must be a number >= 1 or \"inf\"");
  }
  return j.get<double>();
}

std::uint64_t tester_seed(std::uint64_t instance_seed) { return derive_seed(instance_seed, 0x7e57); }

}  // namespace

std::string to_string(TesterKind t) {
  for (auto& [k, n] : tester_names())
    if (k == t) return n;
  return "?";
}

TesterKind parse_tester(const std::string& name) {
  for (auto& [k, n] : tester_names())
    if (n == name) return k;
  throw ConfigError("unknown tester '" + name + "'");
}

std::string to_string(Truth t) {
  switch (t) {
    case Truth::psd: return "psd";
    case Truth::far: return "far";
    case Truth::gap: return "gap";
  }
  return "?";
}

CalibrationSuite parse_suite(const std::string& name) {
  for (auto& [k, n] : suite_names())
    if (n == name) return k;
  throw ConfigError("unknown calibration suite '" + name + "'");
}

std::string to_string(CalibrationSuite s) {
  for (auto& [k, n] : suite_names())
    if (k == s) return n;
  return "?";
}

void ExperimentConfig::validate() const {
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("eps must be in (0,1)");
  if (!(p >= 1.0)) throw ConfigError("p must be >= 1");
  if (instance.dim < 1) throw ConfigError("instance dim must be positive");
  if (format != "csv" && format != "json") throw ConfigError("format must be csv or json");
  if (spectrum_k < 1) throw ConfigError("spectrum_k must be >= 1");
  for (auto& [k, v] : constants.to_map())
    if (!(v > 0.0)) throw ConfigError("constant " + k + " must be positive");
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  ExperimentConfig cfg;
  try {
    json j = json::parse(text);
    cfg.tester = parse_tester(j.at("tester").get<std::string>());
    cfg.instance = InstanceDescriptor::from_json(j.at("instance").dump());
    cfg.eps = j.value("eps", cfg.eps);
    if (j.contains("p")) cfg.p = parse_p(j["p"]);
    cfg.trials = j.value("trials", cfg.trials);
    cfg.seed0 = j.value("seed0", cfg.seed0);
    if (j.contains("constants"))
      cfg.constants = Constants::from_map(j["constants"].get<std::map<std::string, double>>());
    cfg.output_path = j.value("output_path", cfg.output_path);
    cfg.format = j.value("format", cfg.format);
    cfg.spectrum_k = j.value("spectrum_k", cfg.spectrum_k);
    cfg.timing = j.value("timing", cfg.timing);
    cfg.threads = j.value("threads", cfg.threads);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

Truth ground_truth_from_eigenvalues(const Vector& ev, double eps, double p) {
  const double lmin = ev.minCoeff();
  const double np = schatten_norm(ev, p);
  const double op = ev.cwiseAbs().maxCoeff();
  if (lmin >= -1e-12 * op) return Truth::psd;
  if (lmin <= -eps * np + 1e-9 * np) return Truth::far;
  return Truth::gap;
}

Truth ground_truth(const Matrix& A, double eps, double p) {
  return ground_truth_from_eigenvalues(eigenvalues_of(A), eps, p);
}

TrialRecord run_trial(const ExperimentConfig& cfg, int index) {
  InstanceDescriptor desc = cfg.instance;
  desc.seed = cfg.seed0 + static_cast<std::uint64_t>(index);
  if (desc.kind == "spiked" && desc.shift == 0.0)
    desc.shift = cfg.constants.spiked_shift * std::sqrt(static_cast<double>(desc.dim));
  DenseOperator op = make_instance(desc, cfg.eps, cfg.p);
  const Vector ev = eigenvalues_of(op.backing());
  TrialRecord rec;
  rec.seed = desc.seed;
  rec.truth = ground_truth_from_eigenvalues(ev, cfg.eps, cfg.p);
  const std::uint64_t ts = tester_seed(desc.seed);
  const Constants& c = cfg.constants;
  const Index d = op.dim();

  auto t0 = std::chrono::steady_clock::now();
  std::optional<Verdict> v;
  switch (cfg.tester) {
    case TesterKind::oja_l1:
      v = oja_l1_tester(op, lp_to_l1_eps(cfg.eps, cfg.p, d), OjaConfig::from_constants(c), ts);
      break;
    case TesterKind::bilinear_sketch:
      v = bilinear_sketch_tester(op, cfg.eps, c.c_psd, ts, c);
      break;
    case TesterKind::adaptive_l2:
      v = adaptive_l2_tester(op, cfg.eps, ts, c);
      break;
    case TesterKind::nonadaptive_l1:
      v = nonadaptive_l1_tester(op, lp_to_l1_eps(cfg.eps, cfg.p, d), ts, c);
      break;
    case TesterKind::krylov:
      v = krylov_tester(op, cfg.eps, cfg.p, 0.0, ts, c);
      break;
    case TesterKind::nonadaptive_mv:
      v = nonadaptive_mv_tester(op, cfg.eps, cfg.p, ts, c);
      break;
    case TesterKind::spectrum:
    case TesterKind::spectrum_adaptive: {
      EigenEstimate e = cfg.tester == TesterKind::spectrum
                            ? top_eigs_signed(op, cfg.spectrum_k, cfg.eps, ts, c)
                            : top_eigs_signed_adaptive(op, cfg.spectrum_k, cfg.eps, ts, c);
      GuaranteeCheck g = check_spectral_guarantee(ev, e.values, cfg.spectrum_k, cfg.eps);
      rec.verdict = g.holds && g.signs_ok;
      rec.statistic = g.max_error;
      if (e.queries != op.vmv_queries())
        throw std::logic_error("query accounting mismatch in spectrum estimator");
      break;
    }
  }
  auto t1 = std::chrono::steady_clock::now();
  if (v) {
    rec.verdict = v->is_psd;
    rec.statistic = v->statistic;
    if (v->witness) rec.witness_valid = op.peek_quad_form(*v->witness) < 0.0;
    if (v->queries_used != op.mv_queries() + op.vmv_queries())
      throw std::logic_error("query accounting mismatch in " + to_string(cfg.tester));
  }
  rec.queries_mv = op.mv_queries();
  rec.queries_vmv = op.vmv_queries();
  if (cfg.timing) rec.wall_time_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  return rec;
}

namespace {

std::string summarize(const ExperimentConfig& cfg, const std::vector<TrialRecord>& recs) {
  json s;
  s["tester"] = to_string(cfg.tester);
  s["eps"] = cfg.eps;
  s["p"] = std::isinf(cfg.p) ? json("inf") : json(cfg.p);
  s["trials"] = cfg.trials;
  s["seed0"] = cfg.seed0;
  s["instance"] = json::parse(cfg.instance.to_json());
  const bool spectral =
      cfg.tester == TesterKind::spectrum || cfg.tester == TesterKind::spectrum_adaptive;
  for (Truth t : {Truth::psd, Truth::far, Truth::gap}) {
    json g;
    int n = 0, rejects = 0, witnesses = 0, valid = 0;
    std::vector<double> stats;
    for (const auto& r : recs) {
      if (r.truth != t) continue;
      ++n;
      if (!r.verdict) ++rejects;
      if (r.witness_valid) {
        ++witnesses;
        if (*r.witness_valid) ++valid;
      }
      if (r.statistic) stats.push_back(*r.statistic);
    }
    g["count"] = n;
    if (spectral) {
      g["guarantee_rate"] = n ? 1.0 - static_cast<double>(rejects) / n : 0.0;
    } else {
      g["reject_rate"] = n ? static_cast<double>(rejects) / n : 0.0;
      g["accept_rate"] = n ? 1.0 - static_cast<double>(rejects) / n : 0.0;
    }
    g["witnesses"] = witnesses;
    g["witnesses_valid"] = valid;
    if (!stats.empty()) {
      json q;
      for (double p : {0.01, 0.05, 0.5, 0.95, 0.99}) q[fmt(p)] = quantile(stats, p);
      g["statistic_quantiles"] = q;
    }
    s[to_string(t)] = g;
  }
  double mv_sum = 0, vmv_sum = 0;
  std::int64_t mv_max = 0, vmv_max = 0;
  for (const auto& r : recs) {
    mv_sum += r.queries_mv;
    vmv_sum += r.queries_vmv;
    mv_max = std::max(mv_max, r.queries_mv);
    vmv_max = std::max(vmv_max, r.queries_vmv);
  }
  s["queries_mv_mean"] = mv_sum / recs.size();
  s["queries_mv_max"] = mv_max;
  s["queries_vmv_mean"] = vmv_sum / recs.size();
  s["queries_vmv_max"] = vmv_max;
  s["excluded_gap_instances"] = s["gap"]["count"];
  return s.dump(2);
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult res;
  res.records.resize(cfg.trials);
  parallel_for(cfg.trials, cfg.threads, [&](int i) { res.records[i] = run_trial(cfg, i); });
  res.summary_json = summarize(cfg, res.records);
  return res;
}

std::string records_csv(const std::vector<TrialRecord>& records) {
  std::ostringstream os;
  os << "seed,truth,verdict,queries_mv,queries_vmv,statistic,witness_valid,wall_time_ms\n";
  for (const auto& r : records) {
    os << r.seed << ',' << to_string(r.truth) << ',' << (r.verdict ? "psd" : "not_psd") << ','
       << r.queries_mv << ',' << r.queries_vmv << ',' << (r.statistic ? fmt(*r.statistic) : "")
       << ',' << (r.witness_valid ? (*r.witness_valid ? "true" : "false") : "") << ','
       << fmt(r.wall_time_ms) << '\n';
  }
  return os.str();
}

void write_outputs(const ExperimentResult& res, const std::string& dir, const std::string& format) {
  std::filesystem::create_directories(dir);
  if (format == "json") {
    json arr = json::array();
    for (const auto& r : res.records) {
      json j;
      j["seed"] = r.seed;
      j["truth"] = to_string(r.truth);
      j["verdict"] = r.verdict ? "psd" : "not_psd";
      j["queries_mv"] = r.queries_mv;
      j["queries_vmv"] = r.queries_vmv;
      j["statistic"] = r.statistic ? json(*r.statistic) : json(nullptr);
      j["witness_valid"] = r.witness_valid ? json(*r.witness_valid) : json(nullptr);
      j["wall_time_ms"] = r.wall_time_ms;
      arr.push_back(j);
    }
    std::ofstream(dir + "/trials.json") << arr.dump(2) << "\n";
  } else {
    std::ofstream(dir + "/trials.csv") << records_csv(res.records);
  }
  std::ofstream(dir + "/summary.json") << res.summary_json << "\n";
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const size_t n = x.size();
  if (n < 2) return 0.0;
  double mx = 0, my = 0;
  for (size_t i = 0; i < n; ++i) {
    mx += std::log(x[i]) / n;
    my += std::log(y[i]) / n;
  }
  double sxy = 0, sxx = 0;
  for (size_t i = 0; i < n; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxx > 0 ? sxy / sxx : 0.0;
}

// ---------------------------------------------------------------- scaling

namespace {

struct SizedTester {
  std::function<bool(const DenseOperator&, std::int64_t, std::uint64_t)> rejects;
  std::function<std::int64_t(std::int64_t)> budget;
  std::int64_t max_size;
};

SizedTester sized_tester(TesterKind t, double eps, double p, Index d, const Constants& c) {
  SizedTester s;
  switch (t) {
    case TesterKind::oja_l1: {
      OjaConfig cfg = OjaConfig::from_constants(c);
      cfg.amplification = static_cast<int>(c.scaling_reps_oja);
      const double e1 = lp_to_l1_eps(eps, p, d);
      s.rejects = [cfg, e1](const DenseOperator& op, std::int64_t N, std::uint64_t seed) {
        OjaConfig run = cfg;
        run.max_iters = static_cast<int>(N);
        return !oja_l1_tester(op, e1, run, seed).is_psd;
      };
      s.budget = [cfg, e1, d](std::int64_t N) {
        OjaConfig run = cfg;
        run.max_iters = static_cast<int>(N);
        return oja_budget(d, e1, run);
      };
      s.max_size = 1 << 20;
      break;
    }
    case TesterKind::nonadaptive_l1: {
      const int reps = static_cast<int>(c.scaling_reps_na);
      s.rejects = [reps](const DenseOperator& op, std::int64_t m, std::uint64_t seed) {
        return !nonadaptive_l1_sized(op, m, reps, seed).is_psd;
      };
      s.budget = [reps](std::int64_t m) { return reps * m * (m + 1) / 2; };
      s.max_size = d;
      break;
    }
    case TesterKind::krylov: {
      const int reps = static_cast<int>(c.scaling_reps_krylov);
      s.rejects = [reps](const DenseOperator& op, std::int64_t k, std::uint64_t seed) {
        return !krylov_sized(op, static_cast<int>(k), reps, 0.0, seed).is_psd;
      };
      s.budget = [reps](std::int64_t k) { return reps * (k + 1); };
      s.max_size = d - 1;
      break;
    }
    case TesterKind::nonadaptive_mv: {
      const int reps = static_cast<int>(c.scaling_reps_mv);
      s.rejects = [reps](const DenseOperator& op, std::int64_t m, std::uint64_t seed) {
        return !nonadaptive_mv_sized(op, m, reps, seed).is_psd;
      };
      s.budget = [reps](std::int64_t m) { return reps * m; };
      s.max_size = d;
      break;
    }
    default:
      throw ConfigError("scaling is defined for oja_l1, nonadaptive_l1, krylov and nonadaptive_mv");
  }
  return s;
}

// Krylov is exact on a rank-one perturbation of the identity, so its sweep
// uses the harmonic far spectrum; the others use the flat one.
std::string scaling_family(TesterKind t) {
  return t == TesterKind::krylov ? "far_harmonic" : "far_flat";
}

}  // namespace

ScalingTable scaling_report(TesterKind tester, double p, const std::vector<double>& eps_list,
                            const std::vector<Index>& d_list, int trials, std::uint64_t seed,
                            const Constants& c, double target) {
  if (eps_list.empty() || d_list.empty()) throw ConfigError("scaling: eps and dims must be non-empty");
  if (trials < 1) throw ConfigError("scaling: trials must be >= 1");
  ScalingTable table;
  table.tester = to_string(tester);
  table.p = p;
  const std::string family = scaling_family(tester);
  for (Index d : d_list) {
    for (double eps : eps_list) {
      if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("scaling: eps must be in (0,1)");
      SizedTester st = sized_tester(tester, eps, p, d, c);
      std::vector<DenseOperator> pool;
      std::vector<std::uint64_t> seeds;
      for (int i = 0; i < trials; ++i) {
        const std::uint64_t s = derive_seed(seed, (static_cast<std::uint64_t>(d) << 32) ^
                                                      static_cast<std::uint64_t>(i) ^
                                                      std::bit_cast<std::uint64_t>(eps));
        InstanceDescriptor desc;
        desc.kind = "rotated_diag";
        desc.dim = d;
        desc.family = family;
        desc.seed = s;
        pool.push_back(make_instance(desc, eps, p));
        seeds.push_back(tester_seed(s));
      }
      auto rate = [&](std::int64_t size) {
        std::vector<char> hit(trials, 0);
        parallel_for(trials, 0, [&](int i) { hit[i] = st.rejects(pool[i], size, seeds[i]); });
        return static_cast<double>(std::count(hit.begin(), hit.end(), 1)) / trials;
      };
      std::int64_t lo = 0, hi = 1;
      double hi_rate = rate(hi);
      while (hi_rate < target && hi < st.max_size) {
        lo = hi;
        hi = std::min(st.max_size, hi * 2);
        hi_rate = rate(hi);
      }
      while (hi - lo > 1) {
        const std::int64_t mid = (lo + hi) / 2;
        const double r = rate(mid);
        if (r >= target) {
          hi = mid;
          hi_rate = r;
        } else {
          lo = mid;
        }
      }
      table.rows.push_back({eps, d, hi, st.budget(hi), hi_rate});
    }
  }
  if (eps_list.size() > 1) {
    std::vector<double> x, y;
    for (const auto& r : table.rows)
      if (r.d == d_list.front()) {
        x.push_back(1.0 / r.eps);
        y.push_back(static_cast<double>(r.budget));
      }
    table.slope_eps = loglog_slope(x, y);
  }
  if (d_list.size() > 1) {
    std::vector<double> x, y;
    for (const auto& r : table.rows)
      if (r.eps == eps_list.front()) {
        x.push_back(static_cast<double>(r.d));
        y.push_back(static_cast<double>(r.budget));
      }
    table.slope_d = loglog_slope(x, y);
  }
  return table;
}

std::string ScalingTable::to_csv() const {
  std::ostringstream os;
  os << "tester,p,eps,d,size,budget,success\n";
  for (const auto& r : rows)
    os << tester << ',' << fmt(p) << ',' << fmt(r.eps) << ',' << r.d << ',' << r.size << ','
       << r.budget << ',' << fmt(r.success) << '\n';
  return os.str();
}

std::string ScalingTable::to_json() const {
  json j;
  j["tester"] = tester;
  j["p"] = std::isinf(p) ? json("inf") : json(p);
  json arr = json::array();
  for (const auto& r : rows)
    arr.push_back({{"eps", r.eps}, {"d", r.d}, {"size", r.size}, {"budget", r.budget},
                   {"success", r.success}});
  j["rows"] = arr;
  j["slope_eps"] = slope_eps ? json(*slope_eps) : json(nullptr);
  j["slope_d"] = slope_d ? json(*slope_d) : json(nullptr);
  return j.dump(2);
}

}  // namespace psdprobe
