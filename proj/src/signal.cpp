#include "tactile/signal.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace tactile {

namespace {

constexpr double kPi = std::numbers::pi;

// Prewarped analog frequency for a cutoff in Hz.
double prewarp(double cutoff, double fs) { return std::tan(kPi * cutoff / fs); }

}  // namespace

FilterChain::FilterChain(double hp_cutoff, double lp_cutoff, double sample_rate,
                         double threshold)
    : hp_cutoff_(hp_cutoff), lp_cutoff_(lp_cutoff), sample_rate_(sample_rate),
      threshold_(threshold) {
  if (!(hp_cutoff > 0.0) || !(lp_cutoff > 0.0) || !(threshold > 0.0)) {
    throw std::invalid_argument("FilterChain: cutoffs and threshold must be positive");
  }
  if (!(sample_rate > 2.0 * hp_cutoff) || !(sample_rate > 2.0 * lp_cutoff)) {
    throw std::invalid_argument("FilterChain: cutoff at or above Nyquist");
  }
  const double kh = prewarp(hp_cutoff, sample_rate);
  hp_b0_ = 1.0 / (1.0 + kh);
  hp_a1_ = (kh - 1.0) / (kh + 1.0);
  const double kl = prewarp(lp_cutoff, sample_rate);
  lp_b0_ = kl / (1.0 + kl);
  lp_a1_ = (kl - 1.0) / (kl + 1.0);
}

void FilterChain::reset() {
  primed_ = false;
  hp_x_ = hp_y_ = lp_x_ = lp_y_ = 0.0;
}

double FilterChain::step(double raw) {
  if (!primed_) {
    hp_x_ = raw;
    primed_ = true;
  }
  hp_y_ = hp_b0_ * (raw - hp_x_) - hp_a1_ * hp_y_;
  hp_x_ = raw;
  const double rect = std::abs(hp_y_);
  lp_y_ = lp_b0_ * (rect + lp_x_) - lp_a1_ * lp_y_;
  lp_x_ = rect;
  // The low-pass of a non-negative input stays non-negative; clamp rounding.
  if (lp_y_ < 0.0) lp_y_ = 0.0;
  return lp_y_;
}

double process_sample(FilterChain& chain, double raw) { return chain.step(raw); }

bool detect_contact(FilterChain& chain, double raw) {
  return chain.step(raw) > chain.threshold();
}

BarometerTrace synthesize_trace(const TraceOptions& o) {
  if (!(o.duration > 0.0)) throw std::invalid_argument("synthesize_trace: duration must be > 0");
  BarometerTrace trace;
  trace.sample_rate = o.sample_rate;
  const auto n = static_cast<std::size_t>(std::llround(o.duration * o.sample_rate)) + 1;
  trace.samples.assign(n, 0.0);

  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double prev_white = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / o.sample_rate;
    double v = kBaselinePressure + o.drift_rate * t;
    if (o.noise_std > 0.0) {
      // Two-tap average of white noise, rescaled to the requested std.
      const double white = gauss(rng);
      v += o.noise_std * (white + prev_white) / std::sqrt(2.0);
      prev_white = white;
    }
    trace.samples[i] = v;
  }

  const double vib_freq = o.sample_rate / 4.0;
  for (const auto& ev : o.events) {
    const auto start = static_cast<std::size_t>(std::llround(ev.time * o.sample_rate));
    const auto end = static_cast<std::size_t>(
        std::llround((ev.time + ev.duration) * o.sample_rate));
    if (start >= n) continue;
    const std::size_t last = std::min(end, n - 1);
    trace.ground_truth_events.emplace_back(start, last);
    for (std::size_t i = start; i <= last; ++i) {
      const double t = static_cast<double>(i) / o.sample_rate;
      const double tau = t - ev.time;
      const double envelope =
          1.0 + o.whisking_depth * std::sin(2.0 * kPi * o.whisking_frequency * tau);
      const double vibration =
          0.4 * ev.magnitude * envelope * std::sin(2.0 * kPi * vib_freq * tau + kPi / 4.0);
      trace.samples[i] += ev.magnitude + vibration;
    }
  }
  return trace;
}

std::vector<double> filter_trace(FilterChain chain, std::span<const double> samples) {
  chain.reset();
  std::vector<double> out;
  out.reserve(samples.size());
  for (double s : samples) out.push_back(chain.step(s));
  return out;
}

}  // namespace tactile
