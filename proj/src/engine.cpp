#include "fracbound/engine.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <new>
#include <thread>

#include "fracbound/errors.hpp"
#include "kernels.hpp"

namespace fracbound {

void validate(const LossSpec& spec, const GDConfig& cfg) {
    validate(spec);
    if (cfg.steps < 1) throw UsageError("GDConfig: steps must be >= 1");
    if (!cfg.x0.empty() && static_cast<int>(cfg.x0.size()) != spec.dim) {
        throw UsageError("GDConfig: x0 length does not match LossSpec dim");
    }
    if (cfg.mode == ClassifyMode::SumThreshold) {
        if (!(std::isfinite(cfg.sum_threshold) && cfg.sum_threshold > 0.0)) {
            throw UsageError("GDConfig: sum_threshold must be finite and > 0");
        }
    } else {
        if (!(std::isfinite(cfg.loss_cap) && cfg.loss_cap > 0.0)) {
            throw UsageError("GDConfig: loss_cap must be set, finite, and > 0");
        }
    }
}

std::vector<double> initial_point(const LossSpec& spec, const GDConfig& cfg) {
    if (!cfg.x0.empty()) return cfg.x0;
    return std::vector<double>(static_cast<std::size_t>(spec.dim), 1.0);
}

std::vector<double> gd_step(const LossSpec& spec, std::span<const double> x, double s) {
    std::vector<double> next = loss_gradient(spec, x);
    for (std::size_t i = 0; i < next.size(); ++i) {
        next[i] = x[i] - s * next[i];
    }
    return next;
}

namespace {

struct RunParams {
    int steps;
    ClassifyMode mode;
    double sum_threshold;
    double loss_cap;
    // Once the running sum exceeds sum_threshold + sum_exit_slack it can
    // never drop back under sum_threshold, so the loop may stop.
    double sum_exit_slack;
    bool with_intensity;
};

RunParams make_params(const LossSpec& spec, const GDConfig& cfg, bool with_intensity) {
    RunParams p{};
    p.steps = cfg.steps;
    p.mode = cfg.mode;
    p.sum_threshold = cfg.sum_threshold;
    p.loss_cap = cfg.loss_cap;
    const double lower = detail::loss_lower_bound(spec);
    p.sum_exit_slack = lower < 0.0 ? -lower * static_cast<double>(cfg.steps) : 0.0;
    p.with_intensity = with_intensity;
    return p;
}

// Tracks the per-step loss stream and decides classification. update()
// returns true when the run should stop (divergence is already sealed).
struct Classifier {
    const RunParams& p;
    double sum = 0.0;
    double inv_sum = 0.0;
    bool crossed = false;
    bool non_finite = false;

    explicit Classifier(const RunParams& params) : p(params) {}

    bool update(double f) {
        if (!std::isfinite(f)) {
            non_finite = true;
            return true;
        }
        sum += f;
        if (p.with_intensity) inv_sum += 1.0 / f;
        if (p.mode == ClassifyMode::LossCap) {
            if (f >= p.loss_cap) {
                crossed = true;
                return true;
            }
            return false;
        }
        if (sum > p.sum_threshold) {
            crossed = true;
            if (!std::isfinite(sum) || sum > p.sum_threshold + p.sum_exit_slack) {
                return true;
            }
        }
        return false;
    }

    bool divergent() const { return crossed || non_finite; }
};

RunOutcome finish(const Classifier& c, int steps_executed, double final_loss) {
    RunOutcome out;
    out.classification = c.divergent() ? Classification::Divergent : Classification::Bounded;
    out.intensity = c.divergent() ? c.inv_sum : c.sum;
    out.steps_executed = steps_executed;
    out.final_loss = final_loss;
    return out;
}

template <class Kernel>
RunOutcome run_scalar(const Kernel& k, double x0, double s, const RunParams& p,
                      std::vector<std::vector<double>>* trajectory) {
    Classifier cls(p);
    double x = x0;
    double g;
    k.loss_grad(x, g);
    double f = 0.0;
    int executed = 0;
    if (trajectory) trajectory->push_back({x});
    for (int step = 1; step <= p.steps; ++step) {
        x -= s * g;
        f = k.loss_grad(x, g);
        executed = step;
        if (trajectory) trajectory->push_back({x});
        if (cls.update(f)) break;
    }
    return finish(cls, executed, f);
}

template <class Kernel>
RunOutcome run_nd(const Kernel& k, std::span<const double> x0, double s, const RunParams& p,
                  std::vector<std::vector<double>>* trajectory) {
    Classifier cls(p);
    std::vector<double> x(x0.begin(), x0.end());
    std::vector<double> g(x.size());
    std::vector<double> scratch(x.size());
    k.loss_grad(x, g, scratch);
    double f = 0.0;
    int executed = 0;
    if (trajectory) trajectory->push_back(x);
    for (int step = 1; step <= p.steps; ++step) {
        for (std::size_t i = 0; i < x.size(); ++i) x[i] -= s * g[i];
        f = k.loss_grad(x, g, scratch);
        executed = step;
        if (trajectory) trajectory->push_back(x);
        if (cls.update(f)) break;
    }
    return finish(cls, executed, f);
}

RunOutcome run_one(const LossSpec& spec, std::span<const double> x0, double s,
                   const RunParams& p, std::vector<std::vector<double>>* trajectory) {
    if (detail::use_scalar_path(spec)) {
        return detail::visit_scalar(
            spec, [&](const auto& k) { return run_scalar(k, x0[0], s, p, trajectory); });
    }
    return detail::visit_nd(spec,
                            [&](const auto& k) { return run_nd(k, x0, s, p, trajectory); });
}

}  // namespace

RunOutcome run_gd(const LossSpec& spec, const GDConfig& cfg, double s,
                  std::vector<std::vector<double>>* trajectory) {
    validate(spec, cfg);
    const std::vector<double> x0 = initial_point(spec, cfg);
    const RunParams p = make_params(spec, cfg, /*with_intensity=*/true);
    if (trajectory) {
        trajectory->clear();
        trajectory->reserve(static_cast<std::size_t>(cfg.steps) + 1);
    }
    return run_one(spec, x0, s, p, trajectory);
}

double grid_learning_rate(double s_min, double s_max, int n_max, std::uint64_t i) {
    const double n = static_cast<double>(std::uint64_t{1} << n_max);
    return s_min + static_cast<double>(i) * (s_max - s_min) / n;
}

double DivergenceScan::learning_rate_at(std::uint64_t i) const {
    return grid_learning_rate(s_min, s_max, n_max, i);
}

std::uint64_t packed_bit_bytes(int n_max) {
    const std::uint64_t points = (std::uint64_t{1} << n_max) + 1;
    return (points + 7) / 8;
}

int scan_worker_count() {
    int workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    if (const char* env = std::getenv("FRACBOUND_THREADS")) {
        char* end = nullptr;
        const long parsed = std::strtol(env, &end, 10);
        if (end != env && parsed >= 1) {
            workers = static_cast<int>(std::min(parsed, 256L));
        }
    }
    return workers;
}

DivergenceScan scan_learning_rates(const LossSpec& spec, const GDConfig& cfg, double s_min,
                                   double s_max, int n_max, bool with_intensity) {
    validate(spec, cfg);
    if (!(std::isfinite(s_min) && std::isfinite(s_max) && s_min < s_max)) {
        throw UsageError("scan_learning_rates: need s_min < s_max");
    }
    if (n_max < 1 || n_max > kMaxScanExponent) {
        throw UsageError("scan_learning_rates: n_max must be in [1, 24]");
    }

    const std::uint64_t points = (std::uint64_t{1} << n_max) + 1;
    const std::vector<double> x0 = initial_point(spec, cfg);
    const RunParams params = make_params(spec, cfg, with_intensity);

    std::vector<std::uint8_t> classes;
    std::vector<double> intensities;
    try {
        classes.resize(points);
        if (with_intensity) intensities.resize(points);
    } catch (const std::bad_alloc&) {
        throw ResourceError("scan_learning_rates: out of memory for grid buffers");
    }

    const int workers =
        static_cast<int>(std::min<std::uint64_t>(scan_worker_count(), points));
    std::atomic<std::uint64_t> next_chunk{0};
    constexpr std::uint64_t chunk = 1024;
    std::exception_ptr failure;
    std::mutex failure_mutex;

    const auto worker = [&]() {
        try {
            for (;;) {
                const std::uint64_t begin = next_chunk.fetch_add(chunk);
                if (begin >= points) return;
                const std::uint64_t end = std::min(points, begin + chunk);
                for (std::uint64_t i = begin; i < end; ++i) {
                    const double s = grid_learning_rate(s_min, s_max, n_max, i);
                    const RunOutcome out = run_one(spec, x0, s, params, nullptr);
                    classes[i] =
                        out.classification == Classification::Divergent ? 1 : 0;
                    if (with_intensity) intensities[i] = out.intensity;
                }
            }
        } catch (...) {
            const std::scoped_lock lock(failure_mutex);
            if (!failure) failure = std::current_exception();
        }
    };

    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) {
        try {
            std::rethrow_exception(failure);
        } catch (const std::bad_alloc&) {
            throw ResourceError("scan_learning_rates: worker ran out of memory");
        }
    }

    DivergenceScan scan;
    scan.s_min = s_min;
    scan.s_max = s_max;
    scan.n_max = n_max;
    scan.spec = spec;
    scan.config = cfg;
    scan.config.x0 = x0;
    scan.bits.assign(packed_bit_bytes(n_max), 0);
    for (std::uint64_t i = 0; i < points; ++i) {
        if (classes[i]) scan.bits[i >> 3] |= static_cast<std::uint8_t>(1u << (i & 7));
    }
    scan.intensities = std::move(intensities);
    return scan;
}

}  // namespace fracbound
