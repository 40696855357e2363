#include "psdprobe/constants.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace psdprobe {

namespace {

template <class F>
void for_each_field(Constants& c, F&& f) {
  f("oja_kappa_m", c.oja_kappa_m);
  f("oja_step", c.oja_step);
  f("oja_iter", c.oja_iter);
  f("oja_amplification", c.oja_amplification);
  f("kappa_sketch", c.kappa_sketch);
  f("c_psd", c.c_psd);
  f("c_far", c.c_far);
  f("trace_samples", c.trace_samples);
  f("trace_groups", c.trace_groups);
  f("frob_fail", c.frob_fail);
  f("l2_probes", c.l2_probes);
  f("l2_scale", c.l2_scale);
  f("l2_iter", c.l2_iter);
  f("l2_amplification", c.l2_amplification);
  f("kappa_na", c.kappa_na);
  f("na_reps", c.na_reps);
  f("kappa_krylov", c.kappa_krylov);
  f("krylov_reps", c.krylov_reps);
  f("kappa_mv", c.kappa_mv);
  f("mv_reps", c.mv_reps);
  f("spectrum_kappa_r", c.spectrum_kappa_r);
  f("embed_rows", c.embed_rows);
  f("spectrum_rep_const", c.spectrum_rep_const);
  f("spiked_shift", c.spiked_shift);
  f("scaling_reps_oja", c.scaling_reps_oja);
  f("scaling_reps_krylov", c.scaling_reps_krylov);
  f("scaling_reps_na", c.scaling_reps_na);
  f("scaling_reps_mv", c.scaling_reps_mv);
}

}  // namespace

std::map<std::string, double> Constants::to_map() const {
  std::map<std::string, double> m;
  Constants copy = *this;
  for_each_field(copy, [&](const char* name, double& v) { m[name] = v; });
  return m;
}

Constants Constants::from_map(const std::map<std::string, double>& m, const Constants& base) {
  Constants c = base;
  std::map<std::string, double*> slots;
  for_each_field(c, [&](const char* name, double& v) { slots[name] = &v; });
  for (const auto& [k, v] : m) {
    auto it = slots.find(k);
    if (it == slots.end()) throw std::invalid_argument("unknown constant '" + k + "'");
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument("constant '" + k + "' must be positive");
    *it->second = v;
  }
  return c;
}

Constants Constants::from_map(const std::map<std::string, double>& m) {
  return from_map(m, Constants{});
}

Constants Constants::defaults() { return Constants{}; }

Constants Constants::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open constants file " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  if (j.contains("constants")) j = j["constants"];
  return from_map(j.get<std::map<std::string, double>>());
}

void Constants::save(const std::string& path) const {
  std::ofstream out(path);
  out << nlohmann::json(to_map()).dump(2) << "\n";
}

}  // namespace psdprobe
