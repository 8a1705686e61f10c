#pragma once

#include <cstdint>
#include <cstdio>
#include <istream>
#include <stdexcept>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "backbone/adversary.hpp"
#include "backbone/bounds.hpp"
#include "backbone/execution.hpp"
#include "backbone/types.hpp"

namespace backbone {

// --- strict flat INI --------------------------------------------------------

/// Sections of key=value pairs; '#' and ';' start comments. Duplicate keys
/// and malformed lines are errors. Consumers must claim every key: leftovers
/// are reported as unknown-key config errors.
class IniFile {
 public:
  static IniFile parse(std::istream& is) {
    IniFile ini;
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      std::string s = strip(line);
      if (s.empty() || s[0] == '#' || s[0] == ';') continue;
      if (s.front() == '[') {
        if (s.back() != ']') throw config_error("line " + std::to_string(lineno) + ": bad section header");
        section = strip(s.substr(1, s.size() - 2));
        ini.sections_[section];  // empty sections are allowed
        continue;
      }
      auto eq = s.find('=');
      if (eq == std::string::npos)
        throw config_error("line " + std::to_string(lineno) + ": expected key = value");
      std::string key = strip(s.substr(0, eq));
      std::string val = strip(s.substr(eq + 1));
      if (key.empty()) throw config_error("line " + std::to_string(lineno) + ": empty key");
      auto& sec = ini.sections_[section];
      if (sec.count(key)) throw config_error("duplicate key: " + section + "." + key);
      sec.emplace(key, val);
    }
    return ini;
  }

  bool has_section(const std::string& name) const { return sections_.count(name) != 0; }

  std::optional<std::string> take(const std::string& section, const std::string& key) {
    auto sit = sections_.find(section);
    if (sit == sections_.end()) return std::nullopt;
    auto kit = sit->second.find(key);
    if (kit == sit->second.end()) return std::nullopt;
    std::string v = kit->second;
    sit->second.erase(kit);
    return v;
  }

  /// Throws if any unclaimed key remains anywhere.
  void finish() const {
    for (const auto& [sec, kvs] : sections_)
      for (const auto& [k, v] : kvs)
        throw config_error("unknown key: [" + sec + "] " + k);
  }

 private:
  static std::string strip(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  std::map<std::string, std::map<std::string, std::string>> sections_;
};

namespace detail {

inline int to_int(const std::string& v, const std::string& what) {
  try {
    std::size_t pos = 0;
    int x = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw config_error("bad integer for " + what + ": " + v);
  }
}

inline std::uint64_t to_u64(const std::string& v, const std::string& what) {
  try {
    std::size_t pos = 0;
    std::uint64_t x = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw config_error("bad integer for " + what + ": " + v);
  }
}

inline double to_double(const std::string& v, const std::string& what) {
  try {
    std::size_t pos = 0;
    double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw config_error("bad number for " + what + ": " + v);
  }
}

inline bool to_bool(const std::string& v, const std::string& what) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw config_error("bad boolean for " + what + ": " + v);
}

inline std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

// --- experiment spec --------------------------------------------------------

/// Which property checks to run and their parameters. Negative/zero values on
/// enabled checks mean "derive from the model" at run time.
struct ChecksSpec {
  bool chain_growth = false;
  double tau = -1.0;       // default: (1-eps) E[X_i]
  int window = -1;         // default: eta*kappa
  bool growth_plus_one = true;
  bool common_prefix = false;
  int k = -1;              // default: ceil((1+c)(1+eps) eta kappa E[X_i])
  bool chain_quality = false;
  double mu = -1.0;        // default: (1 + delta/sigma) t / E[n_alert]
  int ell = -1;            // default: same as k
  bool relations = false;
  bool typical = false;
  bool bad_events = true;
};

struct ExperimentSpec {
  std::string name = "experiment";
  ExecutionConfig config;
  int trials = 1;
  std::uint64_t seed_base = 0;
  ChecksSpec checks;
  std::string outputs = ".";
  double min_pass_rate = 1.0;  // exit-status threshold on enabled checks
};

namespace detail {

inline void parse_model(IniFile& ini, ModelParams& mp) {
  if (auto v = ini.take("model", "n")) mp.n = to_int(*v, "model.n");
  if (auto v = ini.take("model", "t")) mp.t = to_int(*v, "model.t");
  if (auto v = ini.take("model", "s")) mp.s = to_double(*v, "model.s");
  if (auto v = ini.take("model", "q")) mp.q = to_int(*v, "model.q");
  if (auto v = ini.take("model", "delta")) mp.delta_net = to_int(*v, "model.delta");
  if (auto v = ini.take("model", "b")) mp.b_flag = to_bool(*v, "model.b");
  if (auto v = ini.take("model", "kappa")) mp.kappa = to_int(*v, "model.kappa");
  if (auto v = ini.take("model", "eta_kappa")) {
    if (*v == "inf")
      mp.eta_kappa = kEtaKappaInfinite;
    else
      mp.eta_kappa = to_int(*v, "model.eta_kappa");
  }
  if (auto v = ini.take("model", "epsilon")) mp.epsilon = to_double(*v, "model.epsilon");
  if (auto v = ini.take("model", "c")) mp.c = to_double(*v, "model.c");
  auto p = ini.take("model", "p");
  auto p_target = ini.take("model", "p_target_ex");
  if (p && p_target) throw config_error("model.p and model.p_target_ex are exclusive");
  if (p) mp.p = to_double(*p, "model.p");
  if (p_target) {
    double target = to_double(*p_target, "model.p_target_ex");
    double denom = mp.q * (1.0 - mp.s) * (mp.n - mp.t);
    if (denom <= 0.0) throw config_error("p_target_ex needs q(1-s)(n-t) > 0");
    mp.p = target / denom;
  }
}

inline void parse_checks(IniFile& ini, ChecksSpec& c) {
  if (auto v = ini.take("checks", "chain_growth")) c.chain_growth = to_bool(*v, "checks.chain_growth");
  if (auto v = ini.take("checks", "tau")) c.tau = to_double(*v, "checks.tau");
  if (auto v = ini.take("checks", "window")) c.window = to_int(*v, "checks.window");
  if (auto v = ini.take("checks", "growth_plus_one")) c.growth_plus_one = to_bool(*v, "checks.growth_plus_one");
  if (auto v = ini.take("checks", "common_prefix")) c.common_prefix = to_bool(*v, "checks.common_prefix");
  if (auto v = ini.take("checks", "k")) c.k = to_int(*v, "checks.k");
  if (auto v = ini.take("checks", "chain_quality")) c.chain_quality = to_bool(*v, "checks.chain_quality");
  if (auto v = ini.take("checks", "mu")) c.mu = to_double(*v, "checks.mu");
  if (auto v = ini.take("checks", "ell")) c.ell = to_int(*v, "checks.ell");
  if (auto v = ini.take("checks", "relations")) c.relations = to_bool(*v, "checks.relations");
  if (auto v = ini.take("checks", "typical")) c.typical = to_bool(*v, "checks.typical");
  if (auto v = ini.take("checks", "bad_events")) c.bad_events = to_bool(*v, "checks.bad_events");
}

}  // namespace detail

inline ExperimentSpec parse_experiment(std::istream& is) {
  IniFile ini = IniFile::parse(is);
  ExperimentSpec spec;
  if (auto v = ini.take("experiment", "name")) spec.name = *v;
  if (auto v = ini.take("experiment", "trials")) spec.trials = detail::to_int(*v, "experiment.trials");
  if (auto v = ini.take("experiment", "seed_base")) spec.seed_base = detail::to_u64(*v, "experiment.seed_base");
  if (auto v = ini.take("experiment", "outputs")) spec.outputs = *v;
  if (auto v = ini.take("experiment", "min_pass_rate"))
    spec.min_pass_rate = detail::to_double(*v, "experiment.min_pass_rate");
  detail::parse_model(ini, spec.config.params);
  if (auto v = ini.take("execution", "rounds"))
    spec.config.rounds = static_cast<std::uint32_t>(detail::to_u64(*v, "execution.rounds"));
  if (auto v = ini.take("adversary", "strategy"))
    spec.config.adversary.strategy = strategy_from_name(*v);
  if (auto v = ini.take("adversary", "fork_depth"))
    spec.config.adversary.fork_depth = detail::to_int(*v, "adversary.fork_depth");
  if (auto v = ini.take("adversary", "giveup"))
    spec.config.adversary.giveup = detail::to_int(*v, "adversary.giveup");
  detail::parse_checks(ini, spec.checks);
  ini.finish();
  if (spec.trials < 1) throw config_error("experiment.trials must be >= 1");
  spec.config.validate();
  return spec;
}

inline void serialize_model(std::ostream& os, const ModelParams& mp) {
  os << "[model]\n";
  os << "n = " << mp.n << "\n";
  os << "t = " << mp.t << "\n";
  os << "s = " << detail::fmt_double(mp.s) << "\n";
  os << "q = " << mp.q << "\n";
  os << "delta = " << mp.delta_net << "\n";
  os << "b = " << (mp.b_flag ? "true" : "false") << "\n";
  os << "p = " << detail::fmt_double(mp.p) << "\n";
  os << "kappa = " << mp.kappa << "\n";
  if (mp.eta_kappa == kEtaKappaInfinite)
    os << "eta_kappa = inf\n";
  else
    os << "eta_kappa = " << mp.eta_kappa << "\n";
  os << "epsilon = " << detail::fmt_double(mp.epsilon) << "\n";
  os << "c = " << detail::fmt_double(mp.c) << "\n";
}

inline void serialize_experiment(std::ostream& os, const ExperimentSpec& spec) {
  os << "[experiment]\n";
  os << "name = " << spec.name << "\n";
  os << "trials = " << spec.trials << "\n";
  os << "seed_base = " << spec.seed_base << "\n";
  os << "outputs = " << spec.outputs << "\n";
  os << "min_pass_rate = " << detail::fmt_double(spec.min_pass_rate) << "\n";
  serialize_model(os, spec.config.params);
  os << "[execution]\n";
  os << "rounds = " << spec.config.rounds << "\n";
  os << "[adversary]\n";
  os << "strategy = " << strategy_name(spec.config.adversary.strategy) << "\n";
  os << "fork_depth = " << spec.config.adversary.fork_depth << "\n";
  os << "giveup = " << spec.config.adversary.giveup << "\n";
  const ChecksSpec& c = spec.checks;
  os << "[checks]\n";
  os << "chain_growth = " << (c.chain_growth ? "true" : "false") << "\n";
  os << "tau = " << detail::fmt_double(c.tau) << "\n";
  os << "window = " << c.window << "\n";
  os << "growth_plus_one = " << (c.growth_plus_one ? "true" : "false") << "\n";
  os << "common_prefix = " << (c.common_prefix ? "true" : "false") << "\n";
  os << "k = " << c.k << "\n";
  os << "chain_quality = " << (c.chain_quality ? "true" : "false") << "\n";
  os << "mu = " << detail::fmt_double(c.mu) << "\n";
  os << "ell = " << c.ell << "\n";
  os << "relations = " << (c.relations ? "true" : "false") << "\n";
  os << "typical = " << (c.typical ? "true" : "false") << "\n";
  os << "bad_events = " << (c.bad_events ? "true" : "false") << "\n";
}

// --- bounds grid spec --------------------------------------------------------

struct GridSpec {
  std::vector<Model> models;
  ModelParams base;  // delta/b fields are overridden per model
  std::vector<int> t_values;
  DelayDeltaConvention convention = DelayDeltaConvention::Isolated;
};

inline GridSpec parse_grid(std::istream& is) {
  IniFile ini = IniFile::parse(is);
  GridSpec g;
  if (auto v = ini.take("grid", "models")) {
    std::istringstream ms(*v);
    std::string tok;
    while (std::getline(ms, tok, ','))
      g.models.push_back(model_from_name(tok));
  } else {
    g.models = {Model::Sync, Model::Delay, Model::MsgLoss};
  }
  if (auto v = ini.take("grid", "t_values")) {
    std::istringstream ts(*v);
    std::string tok;
    while (std::getline(ts, tok, ','))
      g.t_values.push_back(detail::to_int(tok, "grid.t_values"));
  } else {
    auto t_min = ini.take("grid", "t_min"), t_max = ini.take("grid", "t_max"),
         t_step = ini.take("grid", "t_step");
    int lo = t_min ? detail::to_int(*t_min, "grid.t_min") : 0;
    int hi = t_max ? detail::to_int(*t_max, "grid.t_max") : 0;
    int st = t_step ? detail::to_int(*t_step, "grid.t_step") : 1;
    if (st < 1) throw config_error("grid.t_step must be >= 1");
    for (int t = lo; t <= hi; t += st) g.t_values.push_back(t);
  }
  if (auto v = ini.take("grid", "delay_convention")) {
    if (*v == "strict") g.convention = DelayDeltaConvention::Strict;
    else if (*v == "isolated") g.convention = DelayDeltaConvention::Isolated;
    else throw config_error("grid.delay_convention must be strict|isolated");
  }
  detail::parse_model(ini, g.base);
  ini.finish();
  if (g.t_values.empty()) throw config_error("empty t grid");
  return g;
}

inline ChecksSpec parse_checks_file(std::istream& is) {
  IniFile ini = IniFile::parse(is);
  ChecksSpec c;
  detail::parse_checks(ini, c);
  ini.finish();
  return c;
}

// --- config hash -------------------------------------------------------------

/// FNV-1a over the canonical serialization; stamped into output headers.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

/// The hash covers the experiment content, not where its outputs land: the
/// same spec pointed at two directories produces identical file headers.
inline std::uint64_t config_hash(const ExperimentSpec& spec) {
  ExperimentSpec canon = spec;
  canon.outputs.clear();
  std::ostringstream os;
  serialize_experiment(os, canon);
  return fnv1a(os.str());
}

}  // namespace backbone
