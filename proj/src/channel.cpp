#include "ncv/channel.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "ncv/error.hpp"
#include "ncv/rng.hpp"

namespace ncv::channel {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

constexpr std::uint64_t kStateStream = 0;
constexpr std::uint64_t kShadowStream = 1;

PropagationState next_state(const LmsParams& params, PropagationState current, Rng& rng) {
  const auto& row = params.transition[static_cast<std::size_t>(current)];
  const double u = uniform01(rng);
  double acc = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    acc += row[k];
    if (u < acc) return static_cast<PropagationState>(k);
  }
  // u landed in the rounding slack above the row sum; use the last state
  // with positive mass.
  for (std::size_t k = 3; k-- > 0;) {
    if (row[k] > 0.0) return static_cast<PropagationState>(k);
  }
  return current;
}

}  // namespace

std::string_view to_string(PropagationState s) {
  switch (s) {
    case PropagationState::LineOfSight:
      return "los";
    case PropagationState::Moderate:
      return "moderate";
    case PropagationState::Deep:
      return "deep";
  }
  return "?";
}

std::string_view to_string(Modulation m) { return m == Modulation::BPSK ? "BPSK" : "QPSK"; }

PropagationState parse_state(std::string_view name) {
  const auto n = lower(name);
  if (n == "los" || n == "line-of-sight") return PropagationState::LineOfSight;
  if (n == "moderate") return PropagationState::Moderate;
  if (n == "deep") return PropagationState::Deep;
  throw ParameterError("unknown propagation state '" + std::string(name) + "'");
}

Modulation parse_modulation(std::string_view name) {
  const auto n = lower(name);
  if (n == "bpsk") return Modulation::BPSK;
  if (n == "qpsk") return Modulation::QPSK;
  throw ParameterError("unknown modulation '" + std::string(name) + "'");
}

void LmsParams::validate() const {
  for (const auto& row : transition) {
    double sum = 0.0;
    for (double p : row) {
      if (!(p >= 0.0) || !std::isfinite(p)) throw ParameterError("transition probabilities must be finite and >= 0");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw ParameterError("transition matrix row does not sum to 1");
  }
  if (!(speed_mps > 0.0) || !std::isfinite(speed_mps)) throw ParameterError("speed must be > 0");
  for (const auto& s : states) {
    if (!std::isfinite(s.mean_gain_db)) throw ParameterError("mean gain must be finite");
    if (!(s.shadow_std_db >= 0.0) || !std::isfinite(s.shadow_std_db)) throw ParameterError("shadow std must be >= 0");
    if (!(s.correlation_distance_m > 0.0)) throw ParameterError("correlation distance must be > 0");
  }
}

LmsParams LmsParams::low_height_building_default() {
  LmsParams p;
  p.states = {StateParams{0.0, 0.10, 5.0}, StateParams{-1.0, 0.15, 3.0}, StateParams{-2.3, 0.20, 1.0}};
  constexpr double stay = 0.9999;
  constexpr double move = (1.0 - stay) / 2.0;
  p.transition = {{{stay, move, move}, {move, stay, move}, {move, move, stay}}};
  p.speed_mps = 5.0;
  return p;
}

double ChannelTrace::mean_gain_db() const {
  if (gains_db.empty()) return 0.0;
  return std::accumulate(gains_db.begin(), gains_db.end(), 0.0) / static_cast<double>(gains_db.size());
}

std::vector<PropagationState> state_sequence(const LmsParams& params, PropagationState initial, std::size_t length,
                                             std::uint64_t seed) {
  params.validate();
  if (length == 0) throw ParameterError("trace length must be >= 1");
  Rng rng = make_rng(seed, kStateStream);
  std::vector<PropagationState> states(length);
  states[0] = initial;
  for (std::size_t t = 1; t < length; ++t) states[t] = next_state(params, states[t - 1], rng);
  return states;
}

ChannelTrace generate_trace(const LmsParams& params, PropagationState initial, std::size_t length,
                            double slot_duration, std::uint64_t seed, int receiver_id) {
  if (!(slot_duration > 0.0)) throw ParameterError("slot duration must be > 0");
  const auto states = state_sequence(params, initial, length, seed);

  Rng rng = make_rng(seed, kShadowStream);
  std::normal_distribution<double> normal(0.0, 1.0);

  ChannelTrace trace;
  trace.slot_duration = slot_duration;
  trace.receiver_id = receiver_id;
  trace.gains_db.resize(length);

  // Unit-variance AR(1) shadowing, scaled by the current state's spread.
  double z = normal(rng);
  for (std::size_t t = 0; t < length; ++t) {
    const auto& sp = params.states[static_cast<std::size_t>(states[t])];
    if (t > 0) {
      const double rho = std::exp(-params.speed_mps * slot_duration / sp.correlation_distance_m);
      z = rho * z + std::sqrt(1.0 - rho * rho) * normal(rng);
    }
    trace.gains_db[t] = sp.mean_gain_db + sp.shadow_std_db * z;
  }
  return trace;
}

double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double bit_error_prob(double gain_db, double eb_n0_db, Modulation /*modulation*/) {
  const double gamma = std::pow(10.0, (gain_db + eb_n0_db) / 10.0);
  return std::clamp(q_function(std::sqrt(2.0 * gamma)), 0.0, 0.5);
}

double erasure_prob(double p_b, std::size_t bits) {
  if (p_b <= 0.0) return 0.0;
  if (p_b >= 1.0) return 1.0;
  return std::clamp(-std::expm1(static_cast<double>(bits) * std::log1p(-p_b)), 0.0, 1.0);
}

ErasureTrace to_erasure_trace(const ChannelTrace& trace, double eb_n0_db, Modulation modulation, std::size_t bits) {
  ErasureTrace out;
  out.eb_n0_db = eb_n0_db;
  out.bits_per_packet = bits;
  out.pe.reserve(trace.size());
  for (double g : trace.gains_db) out.pe.push_back(erasure_prob(bit_error_prob(g, eb_n0_db, modulation), bits));
  return out;
}

}  // namespace ncv::channel
