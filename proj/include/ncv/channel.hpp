#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ncv::channel {

enum class PropagationState { LineOfSight = 0, Moderate = 1, Deep = 2 };
enum class Modulation { BPSK, QPSK };

std::string_view to_string(PropagationState s);
std::string_view to_string(Modulation m);
/// Accepts "los", "moderate", "deep" (case-insensitive).
PropagationState parse_state(std::string_view name);
Modulation parse_modulation(std::string_view name);

struct StateParams {
  double mean_gain_db = 0.0;
  double shadow_std_db = 0.0;
  double correlation_distance_m = 1.0;

  bool operator==(const StateParams&) const = default;
};

/// Three-state land-mobile-satellite parameters. The transition matrix is
/// applied once per slot.
struct LmsParams {
  std::array<StateParams, 3> states{};
  std::array<std::array<double, 3>, 3> transition{};
  double speed_mps = 5.0;

  bool operator==(const LmsParams&) const = default;

  /// Throws ParameterError on a non-stochastic matrix or nonpositive speed.
  void validate() const;

  /// "low-height-building-default": band means {0, -1, -2.3} dB, sticky states.
  static LmsParams low_height_building_default();
};

/// Per-slot power gain 10·log10|h|² for one receiver.
struct ChannelTrace {
  std::vector<double> gains_db;
  double slot_duration = 0.67e-3;
  int receiver_id = 0;

  std::size_t size() const { return gains_db.size(); }
  double mean_gain_db() const;
};

struct ErasureTrace {
  std::vector<double> pe;
  double eb_n0_db = 0.0;
  std::size_t bits_per_packet = 10000;

  std::size_t size() const { return pe.size(); }
  double at(std::size_t slot) const { return pe[slot % pe.size()]; }
};

/// State sequence of the slot-level Markov chain; the same one that
/// generate_trace uses for identical arguments.
std::vector<PropagationState> state_sequence(const LmsParams& params, PropagationState initial, std::size_t length,
                                             std::uint64_t seed);

ChannelTrace generate_trace(const LmsParams& params, PropagationState initial, std::size_t length,
                            double slot_duration, std::uint64_t seed, int receiver_id = 0);

/// Gaussian tail Q(x).
double q_function(double x);

/// Uncoded per-bit error probability in AWGN after a power gain of gain_db.
/// BPSK and Gray-coded QPSK share Q(sqrt(2γ)).
double bit_error_prob(double gain_db, double eb_n0_db, Modulation modulation = Modulation::BPSK);

/// 1 - (1 - p_b)^bits, evaluated as -expm1(bits·log1p(-p_b)).
double erasure_prob(double p_b, std::size_t bits);

ErasureTrace to_erasure_trace(const ChannelTrace& trace, double eb_n0_db, Modulation modulation, std::size_t bits);

}  // namespace ncv::channel
