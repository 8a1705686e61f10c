#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace backbone {

using BlockId = std::uint64_t;
using PartyIx = std::int32_t;

// Reserved all-zero id for the genesis block.
inline constexpr BlockId kGenesisId = 0;
// Creator index used for adversarial blocks.
inline constexpr PartyIx kAdversary = -1;
// Creator index for the genesis block (created by nobody).
inline constexpr PartyIx kNobody = -2;

// Sentinel for "no eta*kappa window term" (treated as infinite window).
inline constexpr int kEtaKappaInfinite = 0;

struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct lookup_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct protocol_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct budget_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class PartyStatus : std::uint8_t { Alert = 0, Sleepy = 1, Corrupted = 2 };

/// Oracle difficulty threshold. `full` marks T = 2^kappa (every query succeeds),
/// which does not fit in 64 bits when kappa = 64.
struct Threshold {
  std::uint64_t value = 0;
  bool full = false;
};

/// The model tuple M(q, delta, B) together with the population and
/// probability parameters of an execution.
struct ModelParams {
  int n = 2;             // total parties
  int t = 0;             // corrupted parties
  double s = 0.0;        // per-round sleep probability of an honest party
  int q = 1;             // oracle calculation queries per party per round
  int delta_net = 0;     // message delay in rounds
  bool b_flag = true;    // true: sleepy parties receive deliveries
  double p = 0.5;        // per-query success probability (primitive; T derived)
  int kappa = 64;        // oracle output bit width
  int eta_kappa = 1;     // typical-execution window length (0 = infinite)
  double epsilon = 0.005;
  double c = 1.0;        // adversarial-power cap

  void validate() const {
    if (n < 2) throw config_error("n must be >= 2");
    if (t < 0 || t >= n) throw config_error("require 0 <= t < n");
    if (s < 0.0 || s > 1.0) throw config_error("s must be in [0,1]");
    if (q < 1) throw config_error("q must be >= 1");
    if (delta_net < 0) throw config_error("delta must be >= 0");
    if (p < 0.0 || p > 1.0) throw config_error("p must be in [0,1]");
    if (kappa < 1 || kappa > 64) throw config_error("kappa must be in [1,64]");
    if (eta_kappa < 0) throw config_error("eta_kappa must be >= 0");
    if (epsilon <= 0.0 || epsilon >= 1.0) throw config_error("epsilon must be in (0,1)");
    if (c < 0.0 || c > 1.0) throw config_error("c must be in [0,1]");
    // The three supported instantiations are M(q,0,1), M(1,delta,1), M(q,0,0).
    if (delta_net > 0 && !b_flag)
      throw config_error("unsupported instantiation: delta > 0 with B = 0");
    if (delta_net > 0 && q != 1)
      throw config_error("unsupported instantiation: delta > 0 requires q = 1");
  }

  /// T = round(p * 2^kappa), as a threshold on kappa-bit samples.
  Threshold threshold() const {
    long double scaled = static_cast<long double>(p) * std::exp2l(static_cast<long double>(kappa));
    long double top = std::exp2l(static_cast<long double>(kappa));
    long double r = std::roundl(scaled);
    if (r >= top) return {0, true};
    return {static_cast<std::uint64_t>(r), false};
  }

  std::uint64_t sample_mask() const {
    return kappa == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << kappa) - 1);
  }

  bool operator==(const ModelParams&) const = default;
};

}  // namespace backbone
