#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "backbone/bounds.hpp"
#include "backbone/config.hpp"
#include "backbone/execution.hpp"
#include "backbone/metrics.hpp"
#include "backbone/version.hpp"

namespace backbone {

inline std::string file_header(std::uint64_t cfg_hash) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "# %s v%s config=%016llx", kToolName, kVersion,
                static_cast<unsigned long long>(cfg_hash));
  return buf;
}

/// Concrete property-check parameters after filling the derive-from-model
/// defaults of a ChecksSpec.
struct ResolvedChecks {
  double tau = 0.0;
  std::uint32_t window = 0;
  bool growth_plus_one = true;
  std::uint32_t k = 0;
  double mu = 0.0;
  std::uint32_t ell = 0;
};

inline ResolvedChecks resolve_checks(const ChecksSpec& c, const ModelParams& mp,
                                     const RelationExpectations& rel) {
  ResolvedChecks r;
  Model model = classify_model(mp);
  double dmin = delta_min(model, rel.ex, rel.ex_star, mp.epsilon, mp.delta_net,
                          mp.eta_kappa);
  double eta_kappa = mp.eta_kappa == kEtaKappaInfinite ? 1.0
                                                       : static_cast<double>(mp.eta_kappa);
  r.tau = c.tau >= 0.0 ? c.tau : (1.0 - mp.epsilon) * rel.ex;
  r.window = c.window > 0 ? static_cast<std::uint32_t>(c.window)
                          : static_cast<std::uint32_t>(eta_kappa);
  r.growth_plus_one = c.growth_plus_one;
  r.k = c.k >= 0 ? static_cast<std::uint32_t>(c.k)
                 : static_cast<std::uint32_t>(
                       std::ceil((1.0 + mp.c) * (1.0 + mp.epsilon) * eta_kappa * rel.ex));
  double e_n_alert = (1.0 - mp.s) * (mp.n - mp.t);
  double sigma = model == Model::MsgLoss ? rel.sigma_star : rel.sigma;
  r.mu = c.mu >= 0.0 ? c.mu
                     : (e_n_alert > 0.0 ? (1.0 + dmin / sigma) * mp.t / e_n_alert : 1.0);
  r.ell = c.ell > 0 ? static_cast<std::uint32_t>(c.ell) : r.k;
  return r;
}

struct TrialResult {
  std::uint64_t seed = 0;
  std::uint32_t rounds = 0;
  double x_mean = 0, y_mean = 0, z_mean = 0;
  double x_iso_mean = 0, y_iso_mean = 0, x_star_mean = 0, y_star_mean = 0;
  double n_alert_mean = 0, n_star_alert_mean = 0, n_in_ci_mean = 0;
  BadEventCounts bad;
  bool growth_pass = true, prefix_pass = true, quality_pass = true;
  std::uint64_t relation_windows = 0;
  std::uint64_t relation_pass[5] = {0, 0, 0, 0, 0};  // clauses a..e
  std::uint64_t typical_windows = 0, typical_pass = 0;
  PhiEstimate phi;
};

inline TrialResult evaluate_trial(const ExecutionView& view,
                                  const std::vector<RoundIndicators>& ind,
                                  const ChecksSpec& checks) {
  const ModelParams& mp = view.params;
  auto rel = relation_expectations(mp);
  auto rc = resolve_checks(checks, mp, rel);
  TrialResult tr;
  tr.seed = view.seed;
  tr.rounds = view.rounds;

  double n = static_cast<double>(ind.size());
  for (const auto& r : ind) {
    tr.x_mean += r.x;
    tr.y_mean += r.y;
    tr.z_mean += r.z;
    tr.x_iso_mean += r.x_iso;
    tr.y_iso_mean += r.y_iso;
    tr.x_star_mean += r.x_star;
    tr.y_star_mean += r.y_star;
    tr.n_alert_mean += r.n_alert;
    tr.n_star_alert_mean += r.n_star_alert;
    tr.n_in_ci_mean += r.n_in_ci;
  }
  if (n > 0) {
    tr.x_mean /= n; tr.y_mean /= n; tr.z_mean /= n;
    tr.x_iso_mean /= n; tr.y_iso_mean /= n;
    tr.x_star_mean /= n; tr.y_star_mean /= n;
    tr.n_alert_mean /= n; tr.n_star_alert_mean /= n; tr.n_in_ci_mean /= n;
  }

  if (checks.bad_events) tr.bad = detect_bad_events(view);
  if (checks.chain_growth)
    tr.growth_pass = chain_growth_check(view, rc.tau, rc.window, rc.growth_plus_one).pass;
  if (checks.common_prefix)
    tr.prefix_pass = common_prefix_check(view, rc.k).pass;
  if (checks.chain_quality)
    tr.quality_pass = chain_quality_check(view, rc.mu, rc.ell).pass;

  if ((checks.relations || checks.typical) && mp.eta_kappa != kEtaKappaInfinite) {
    std::size_t w = static_cast<std::size_t>(mp.eta_kappa);
    std::size_t stride = std::max<std::size_t>(1, w / 4);
    if (ind.size() >= w) {
      for (std::size_t first = 1; first + w - 1 <= ind.size(); first += stride) {
        std::size_t last = first + w - 1;
        if (checks.relations) {
          auto rr = relations_check(ind, first, last, mp, rel);
          ++tr.relation_windows;
          tr.relation_pass[0] += rr.a.pass;
          tr.relation_pass[1] += rr.b.pass;
          tr.relation_pass[2] += rr.c.pass;
          tr.relation_pass[3] += rr.d.pass;
          tr.relation_pass[4] += rr.e.pass;
        }
        if (checks.typical) {
          ++tr.typical_windows;
          tr.typical_pass += typical_check(ind, first, last, mp, rel, tr.bad).typical;
        }
      }
    }
  }
  if (!mp.b_flag) accumulate_phi(view, tr.phi);
  return tr;
}

struct SuiteSummary {
  ExperimentSpec spec;
  std::uint64_t cfg_hash = 0;
  std::vector<TrialResult> trials;
  bool pass = true;
};

namespace detail {

inline double rate(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? 1.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace detail

inline nlohmann::ordered_json summary_json(const SuiteSummary& s) {
  using json = nlohmann::ordered_json;
  json j;
  j["tool"] = kToolName;
  j["version"] = kVersion;
  {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(s.cfg_hash));
    j["config_hash"] = buf;
  }
  j["name"] = s.spec.name;
  j["trials"] = s.spec.trials;
  j["rounds"] = s.spec.config.rounds;

  auto mean_of = [&](auto field) {
    std::vector<double> xs;
    for (const auto& t : s.trials) xs.push_back(field(t));
    return sample_stats(xs);
  };
  auto put = [&](const char* key, auto field) {
    auto st = mean_of(field);
    j["estimates"][key] = {{"mean", st.mean}, {"std_error", st.std_error}};
  };
  put("x", [](const TrialResult& t) { return t.x_mean; });
  put("y", [](const TrialResult& t) { return t.y_mean; });
  put("z", [](const TrialResult& t) { return t.z_mean; });
  put("x_iso", [](const TrialResult& t) { return t.x_iso_mean; });
  put("y_iso", [](const TrialResult& t) { return t.y_iso_mean; });
  put("x_star", [](const TrialResult& t) { return t.x_star_mean; });
  put("y_star", [](const TrialResult& t) { return t.y_star_mean; });
  put("n_alert", [](const TrialResult& t) { return t.n_alert_mean; });
  put("n_star_alert", [](const TrialResult& t) { return t.n_star_alert_mean; });
  put("n_in_ci", [](const TrialResult& t) { return t.n_in_ci_mean; });

  std::uint64_t g = 0, p = 0, q = 0, tw = 0, tp = 0, rw = 0, rp[5] = {};
  std::uint64_t ins = 0, cop = 0, pre = 0, races = 0, off = 0;
  for (const auto& t : s.trials) {
    g += t.growth_pass;
    p += t.prefix_pass;
    q += t.quality_pass;
    tw += t.typical_windows;
    tp += t.typical_pass;
    rw += t.relation_windows;
    for (int i = 0; i < 5; ++i) rp[i] += t.relation_pass[i];
    ins += t.bad.insertions;
    cop += t.bad.copies;
    pre += t.bad.predictions;
    races += t.phi.races;
    off += t.phi.off_wins;
  }
  std::uint64_t nt = s.trials.size();
  const ChecksSpec& c = s.spec.checks;
  j["properties"] = {
      {"chain_growth", {{"enabled", c.chain_growth}, {"pass_rate", detail::rate(g, nt)}}},
      {"common_prefix", {{"enabled", c.common_prefix}, {"pass_rate", detail::rate(p, nt)}}},
      {"chain_quality", {{"enabled", c.chain_quality}, {"pass_rate", detail::rate(q, nt)}}},
  };
  j["relations"] = {{"enabled", c.relations},
                    {"windows", rw},
                    {"pass_rate_a", detail::rate(rp[0], rw)},
                    {"pass_rate_b", detail::rate(rp[1], rw)},
                    {"pass_rate_c", detail::rate(rp[2], rw)},
                    {"pass_rate_d", detail::rate(rp[3], rw)},
                    {"pass_rate_e", detail::rate(rp[4], rw)}};
  j["typical"] = {{"enabled", c.typical}, {"windows", tw}, {"pass_rate", detail::rate(tp, tw)}};
  j["bad_events"] = {{"insertions", ins}, {"copies", cop}, {"predictions", pre}};
  j["phi"] = {{"races", races},
              {"off_wins", off},
              {"estimate", races ? static_cast<double>(off) / races : 0.0}};
  j["pass"] = s.pass;
  return j;
}

/// Exit-status rule: every enabled check clears min_pass_rate; enabled
/// bad-event detection demands a clean run; relations gate on clause e).
inline bool suite_pass(const SuiteSummary& s) {
  const ChecksSpec& c = s.spec.checks;
  double thr = s.spec.min_pass_rate;
  std::uint64_t g = 0, p = 0, q = 0, tw = 0, tp = 0, rw = 0, re = 0;
  bool clean = true;
  for (const auto& t : s.trials) {
    g += t.growth_pass;
    p += t.prefix_pass;
    q += t.quality_pass;
    tw += t.typical_windows;
    tp += t.typical_pass;
    rw += t.relation_windows;
    re += t.relation_pass[4];
    clean = clean && t.bad.clean();
  }
  std::uint64_t nt = s.trials.size();
  if (c.chain_growth && detail::rate(g, nt) < thr) return false;
  if (c.common_prefix && detail::rate(p, nt) < thr) return false;
  if (c.chain_quality && detail::rate(q, nt) < thr) return false;
  if (c.relations && detail::rate(re, rw) < thr) return false;
  if (c.typical && detail::rate(tp, tw) < thr) return false;
  if (c.bad_events && !clean) return false;
  return true;
}

/// Runs every trial (seed = seed_base + i) and writes per-trial indicator CSV
/// and trace files plus <name>_summary.json into spec.outputs.
inline SuiteSummary run_suite(const ExperimentSpec& spec, int jobs = 1,
                              bool write_files = true) {
  namespace fs = std::filesystem;
  SuiteSummary summary;
  summary.spec = spec;
  summary.cfg_hash = config_hash(spec);
  summary.trials.resize(static_cast<std::size_t>(spec.trials));
  std::string header = file_header(summary.cfg_hash);

  if (write_files) {
    std::error_code ec;
    fs::create_directories(spec.outputs, ec);
    if (!fs::is_directory(spec.outputs))
      throw config_error("cannot create output directory: " + spec.outputs);
  }

  std::mutex err_mutex;
  std::exception_ptr first_error;
  auto worker = [&](int begin, int step) {
    try {
      for (int i = begin; i < spec.trials; i += step) {
        ExecutionConfig cfg = spec.config;
        cfg.seed = spec.seed_base + static_cast<std::uint64_t>(i);
        ExecutionView view = run_execution(cfg);
        auto ind = extract_indicators(view);
        summary.trials[static_cast<std::size_t>(i)] = evaluate_trial(view, ind, spec.checks);
        if (write_files) {
          fs::path base = fs::path(spec.outputs) /
                          (spec.name + "_trial" + std::to_string(i));
          std::ofstream csv(base.string() + ".csv", std::ios::binary);
          write_indicators_csv(ind, csv, header);
          std::ofstream trace(base.string() + ".trace", std::ios::binary);
          write_trace(view, trace, header.substr(2));
        }
      }
    } catch (...) {
      std::lock_guard<std::mutex> lk(err_mutex);
      if (!first_error) first_error = std::current_exception();
    }
  };

  jobs = std::max(1, std::min(jobs, spec.trials));
  if (jobs == 1) {
    worker(0, 1);
  } else {
    std::vector<std::thread> threads;
    for (int w = 0; w < jobs; ++w) threads.emplace_back(worker, w, jobs);
    for (auto& t : threads) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  summary.pass = suite_pass(summary);
  if (write_files) {
    std::ofstream js((std::filesystem::path(spec.outputs) /
                      (spec.name + "_summary.json")).string(), std::ios::binary);
    js << summary_json(summary).dump(2) << '\n';
  }
  return summary;
}

// --- bounds emission ----------------------------------------------------------

inline nlohmann::ordered_json bounds_json(const BoundsReport& r) {
  using json = nlohmann::ordered_json;
  json j;
  j["model"] = model_name(r.model);
  j["e_n_alert"] = r.counts.e_n_alert;
  j["e_n_sleepy"] = r.counts.e_n_sleepy;
  j["e_n_star_alert"] = r.counts.e_n_star_alert;
  j["ex_lower"] = r.ex_lower;
  j["ex_upper"] = r.ex_upper;
  j["ex"] = r.ex;
  j["ey"] = r.ey;
  j["ey_lower"] = r.ey_lower;
  j["ez"] = r.ez;
  j["ex_iso"] = r.ex_iso;
  j["ey_iso"] = r.ey_iso;
  j["ex_star"] = r.ex_star;
  j["ey_star"] = r.ey_star;
  j["delta_min"] = r.delta_min;
  j["s_max"] = r.s_max.value;
  j["s_max_satisfiable"] = r.s_max.satisfiable;
  j["s_max_printed_formula"] = r.s_max.printed_formula;
  j["s_max_residual"] = r.s_max.residual;
  j["phi_max"] = r.phi_max;
  j["sigma"] = r.sigma;
  j["sigma_prime"] = r.sigma_prime;
  j["sigma_star"] = r.sigma_star;
  j["majority_ok"] = r.majority_ok;
  j["two_ex_ok"] = r.two_ex_ok;
  j["max_adv_fraction"] = r.max_adv_fraction;
  return j;
}

/// Writes figure1.csv (one s_max series per model over the t grid) and
/// bounds.json (a full BoundsReport per grid point) into `out_dir`.
inline void emit_bounds(const GridSpec& grid, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (!fs::is_directory(out_dir))
    throw config_error("cannot create output directory: " + out_dir);

  std::ostringstream canon;
  serialize_model(canon, grid.base);
  for (Model m : grid.models) canon << model_name(m) << ',';
  for (int t : grid.t_values) canon << t << ',';
  std::string header = file_header(fnv1a(canon.str()));

  std::ofstream csv((fs::path(out_dir) / "figure1.csv").string(), std::ios::binary);
  csv << header << '\n';
  csv << "model,t_fraction,s_max\n";
  nlohmann::ordered_json points = nlohmann::ordered_json::array();
  for (Model m : grid.models) {
    ModelParams mp = grid.base;
    switch (m) {
      case Model::Sync: mp.delta_net = 0; mp.b_flag = true; break;
      case Model::Delay:
        mp.b_flag = true;
        if (mp.delta_net < 1) mp.delta_net = 1;
        mp.q = 1;
        break;
      case Model::MsgLoss: mp.delta_net = 0; mp.b_flag = false; break;
    }
    auto series = figure1_dataset(m, mp, grid.t_values, grid.convention);
    for (const auto& pt : series) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%s,%.9f,%.9f", model_name(pt.model).c_str(),
                    pt.t_fraction, pt.s_max);
      csv << buf << '\n';
    }
    for (int t : grid.t_values) {
      ModelParams p2 = mp;
      p2.t = t;
      auto j = bounds_json(bounds_report(p2, grid.convention));
      j["t"] = t;
      j["t_fraction"] = static_cast<double>(t) / p2.n;
      points.push_back(j);
    }
  }
  nlohmann::ordered_json out;
  out["tool"] = kToolName;
  out["version"] = kVersion;
  out["header"] = header;
  out["points"] = points;
  std::ofstream js((fs::path(out_dir) / "bounds.json").string(), std::ios::binary);
  js << out.dump(2) << '\n';
}

}  // namespace backbone
