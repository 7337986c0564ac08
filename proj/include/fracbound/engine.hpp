#pragma once

#include <cstdint>
#include <vector>

#include "fracbound/landscape.hpp"

namespace fracbound {

enum class ClassifyMode { SumThreshold, LossCap };

// Settings shared by every run in a scan. An empty x0 means all coordinates
// start at 1.0.
struct GDConfig {
    std::vector<double> x0;
    int steps = 1000;
    ClassifyMode mode = ClassifyMode::SumThreshold;
    double sum_threshold = 1e16;
    double loss_cap = 0.0;  // required when mode == LossCap
};

// Throws UsageError when the config violates its invariants or does not fit
// the spec's dimension.
void validate(const LossSpec& spec, const GDConfig& cfg);

// x0 resolved against the spec (all-ones default).
std::vector<double> initial_point(const LossSpec& spec, const GDConfig& cfg);

enum class Classification : std::uint8_t { Bounded = 0, Divergent = 1 };

struct RunOutcome {
    Classification classification = Classification::Bounded;
    // Sum of per-step losses when Bounded, sum of their reciprocals when
    // Divergent, over the steps actually executed.
    double intensity = 0.0;
    int steps_executed = 0;
    double final_loss = 0.0;
};

// One GD update: x - s * grad f(x). Non-finite values flow through.
std::vector<double> gd_step(const LossSpec& spec, std::span<const double> x, double s);

// Runs cfg.steps GD updates at learning rate s and classifies the run.
// Per-step losses are taken at the post-update iterates. A SumThreshold run
// is Divergent when the running loss sum ever exceeds cfg.sum_threshold (or
// anything turns non-finite); the loop exits early only once the sum can no
// longer come back under the threshold. A LossCap run stops at the first
// loss >= cfg.loss_cap. When `trajectory` is given it receives the iterates
// x(0), x(1), ..., x(steps_executed).
RunOutcome run_gd(const LossSpec& spec, const GDConfig& cfg, double s,
                  std::vector<std::vector<double>>* trajectory = nullptr);

// Learning-rate grid classified pointwise. bits are packed LSB-first: grid
// point i lives at byte i/8, bit i%8, set means Divergent.
struct DivergenceScan {
    double s_min = 0.0;
    double s_max = 1.5;
    int n_max = 20;
    std::vector<std::uint8_t> bits;
    std::vector<double> intensities;  // empty unless requested
    LossSpec spec;
    GDConfig config;

    std::uint64_t point_count() const { return (std::uint64_t{1} << n_max) + 1; }
    bool divergent_at(std::uint64_t i) const {
        return (bits[i >> 3] >> (i & 7)) & 1u;
    }
    double learning_rate_at(std::uint64_t i) const;
};

// Grid point i sits at s_min + i*(s_max - s_min)/2^n_max.
double grid_learning_rate(double s_min, double s_max, int n_max, std::uint64_t i);

// Number of bytes holding 2^n_max + 1 packed classification bits.
std::uint64_t packed_bit_bytes(int n_max);

// Desk-scale ceiling on n_max; 2^24 + 1 grid points.
inline constexpr int kMaxScanExponent = 24;

// Runs the full grid in parallel. Deterministic: the result is a pure
// function of the inputs, independent of worker count and scheduling.
// Worker parallelism is capped by the FRACBOUND_THREADS environment variable
// (default: hardware concurrency).
DivergenceScan scan_learning_rates(const LossSpec& spec, const GDConfig& cfg, double s_min,
                                   double s_max, int n_max, bool with_intensity);

// Worker cap currently in effect (>= 1).
int scan_worker_count();

}  // namespace fracbound
