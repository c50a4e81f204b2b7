#include <doctest.h>

#include <cmath>
#include <numbers>

#include "tactile/signal.hpp"

using namespace tactile;

namespace {

TraceOptions figure_style_trace() {
  TraceOptions o;
  o.duration = 30.0;
  o.drift_rate = 0.017 / 30.0;
  o.events = {{6.0, 0.01, 1.5}, {14.0, 0.01, 1.5}, {22.0, 0.01, 1.5}};
  o.noise_std = 1e-5;
  o.seed = 3;
  return o;
}

// Runs where the de-trended trace exceeds half the event magnitude.
int count_bumps(const BarometerTrace& tr, double drift_rate, double magnitude) {
  int runs = 0;
  bool above = false;
  for (std::size_t i = 0; i < tr.samples.size(); ++i) {
    const double t = static_cast<double>(i) / tr.sample_rate;
    const bool now = tr.samples[i] - (kBaselinePressure + drift_rate * t) > magnitude / 2.0;
    if (now && !above) ++runs;
    above = now;
  }
  return runs;
}

}  // namespace

TEST_CASE("drift over 30 s matches the endpoint difference") {
  TraceOptions o;
  o.duration = 30.0;
  o.drift_rate = 0.017 / 30.0;
  const auto tr = synthesize_trace(o);
  CHECK(tr.samples.size() == 30 * 64 + 1);
  CHECK(std::abs(tr.samples.back() - tr.samples.front() - 0.017) < 1e-12);
}

TEST_CASE("zero options give a constant baseline") {
  TraceOptions o;
  o.duration = 5.0;
  for (double v : synthesize_trace(o).samples) CHECK(v == kBaselinePressure);
}

TEST_CASE("three events give three bumps") {
  const auto o = figure_style_trace();
  const auto tr = synthesize_trace(o);
  CHECK(tr.ground_truth_events.size() == 3);
  CHECK(count_bumps(tr, o.drift_rate, 0.01) == 3);
}

TEST_CASE("synthesis is deterministic under a seed") {
  const auto a = synthesize_trace(figure_style_trace());
  const auto b = synthesize_trace(figure_style_trace());
  CHECK(a.samples == b.samples);
  auto o = figure_style_trace();
  o.seed = 4;
  CHECK(synthesize_trace(o).samples != a.samples);
}

TEST_CASE("constant input is rejected") {
  for (double level : {0.0, 1.0, kBaselinePressure, -50.0}) {
    FilterChain chain;
    double out = 1.0;
    for (int i = 0; i <= 128; ++i) out = process_sample(chain, level);
    CHECK(out < 1e-6);
  }
}

TEST_CASE("high-pass stage is -3 dB at its cutoff") {
  FilterChain chain;
  const double fs = chain.sample_rate(), f = chain.hp_cutoff();
  double sum_sq = 0.0;
  int count = 0;
  for (int i = 0; i < 64 * 60; ++i) {
    process_sample(chain, std::sin(2.0 * std::numbers::pi * f * i / fs));
    if (i >= 64 * 10) {
      sum_sq += chain.last_highpass() * chain.last_highpass();
      ++count;
    }
  }
  const double gain = std::sqrt(2.0 * sum_sq / count);
  CHECK(gain == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(0.02));
}

TEST_CASE("output is never negative") {
  auto o = figure_style_trace();
  o.noise_std = 1e-3;
  const auto tr = synthesize_trace(o);
  for (double v : filter_trace(FilterChain{}, tr.samples)) CHECK(v >= 0.0);
}

TEST_CASE("quiet and drift-only traces never trigger") {
  TraceOptions o;
  o.duration = 30.0;
  FilterChain quiet;
  for (double v : synthesize_trace(o).samples) CHECK_FALSE(detect_contact(quiet, v));
  o.drift_rate = 0.017 / 30.0;
  FilterChain drift;
  for (double v : synthesize_trace(o).samples) CHECK_FALSE(detect_contact(drift, v));
}

TEST_CASE("a step is detected within 3 samples") {
  FilterChain chain;
  for (int i = 0; i < 64; ++i) CHECK_FALSE(detect_contact(chain, kBaselinePressure));
  bool hit = false;
  for (int i = 0; i < 3 && !hit; ++i) hit = detect_contact(chain, kBaselinePressure + 0.01);
  CHECK(hit);
}

TEST_CASE("event windows are detected with precision and recall 1") {
  const auto tr = synthesize_trace(figure_style_trace());
  FilterChain chain;
  std::vector<bool> detected;
  for (double v : tr.samples) detected.push_back(detect_contact(chain, v));
  const long slack = 3;
  for (std::size_t i = 0; i < detected.size(); ++i) {
    if (!detected[i]) continue;
    bool inside = false;
    for (const auto& [s, e] : tr.ground_truth_events) {
      inside |= static_cast<long>(i) >= static_cast<long>(s) - slack &&
                static_cast<long>(i) <= static_cast<long>(e) + slack;
    }
    CHECK(inside);
  }
  for (const auto& [s, e] : tr.ground_truth_events) {
    for (std::size_t i = s; i <= e; ++i) CHECK(detected[i]);
  }
}

TEST_CASE("invalid chain parameters throw") {
  CHECK_THROWS(FilterChain(0.0));
  CHECK_THROWS(FilterChain(11.3, 40.0));
  CHECK_THROWS(FilterChain(11.3, 31.8, 64.0, 0.0));
}
