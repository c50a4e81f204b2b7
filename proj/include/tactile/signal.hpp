#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace tactile {

constexpr double kBaselinePressure = 101.433;  // kPa

/// High-pass -> rectify -> low-pass cascade, both stages first order and
/// discretized by the bilinear transform with cutoff prewarping.
class FilterChain {
 public:
  explicit FilterChain(double hp_cutoff = 11.3, double lp_cutoff = 31.8,
                       double sample_rate = 64.0, double threshold = 0.0005);

  [[nodiscard]] double hp_cutoff() const { return hp_cutoff_; }
  [[nodiscard]] double lp_cutoff() const { return lp_cutoff_; }
  [[nodiscard]] double sample_rate() const { return sample_rate_; }
  [[nodiscard]] double threshold() const { return threshold_; }

  /// High-pass output of the most recent sample, before rectification.
  [[nodiscard]] double last_highpass() const { return hp_y_; }

  /// Clears the filter memory; the next sample primes the high-pass input.
  void reset();

  double step(double raw);

 private:
  double hp_cutoff_, lp_cutoff_, sample_rate_, threshold_;
  double hp_b0_ = 0.0, hp_a1_ = 0.0;  // y = b0 (x - x1) - a1 y1
  double lp_b0_ = 0.0, lp_a1_ = 0.0;  // y = b0 (x + x1) - a1 y1
  bool primed_ = false;
  double hp_x_ = 0.0, hp_y_ = 0.0;
  double lp_x_ = 0.0, lp_y_ = 0.0;
};

/// Filtered, non-negative value of one raw pressure sample (kPa).
double process_sample(FilterChain& chain, double raw);

/// True iff the filtered value of this sample exceeds the chain threshold.
bool detect_contact(FilterChain& chain, double raw);

struct ContactEvent {
  double time = 0.0;       // s
  double magnitude = 0.0;  // kPa
  double duration = 1.0;   // s
};

struct TraceOptions {
  double duration = 30.0;    // s
  double drift_rate = 0.0;   // kPa/s
  std::vector<ContactEvent> events;
  /// Whisking envelope on the contact vibration: relative depth and rate (Hz).
  double whisking_depth = 0.3;
  double whisking_frequency = 0.5;
  double noise_std = 0.0;  // kPa
  std::uint64_t seed = 0;
  double sample_rate = 64.0;
};

struct BarometerTrace {
  double sample_rate = 64.0;
  std::vector<double> samples;
  /// Inclusive sample-index ranges of the synthesized contacts.
  std::vector<std::pair<std::size_t, std::size_t>> ground_truth_events;
};

/// Baseline plus linear drift, band-limited noise and contact events. A contact is a
/// sustained pressure offset carrying a whisking-modulated vibration. The trace has
/// duration * sample_rate + 1 samples (both endpoints included).
BarometerTrace synthesize_trace(const TraceOptions& options);

/// Runs a fresh copy of `chain` over the samples and returns the filtered values.
std::vector<double> filter_trace(FilterChain chain, std::span<const double> samples);

}  // namespace tactile
