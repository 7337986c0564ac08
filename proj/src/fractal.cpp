#include "fracbound/fractal.hpp"

#include <algorithm>
#include <cmath>

#include "fracbound/errors.hpp"

namespace fracbound {

std::uint64_t boundary_segment_count(const DivergenceScan& scan, int n) {
    if (n < 0 || n > scan.n_max) {
        throw UsageError("boundary_segment_count: level out of range");
    }
    const std::uint64_t stride = std::uint64_t{1} << (scan.n_max - n);
    const std::uint64_t segments = std::uint64_t{1} << n;
    std::uint64_t count = 0;
    bool prev = scan.divergent_at(0);
    for (std::uint64_t i = 1; i <= segments; ++i) {
        const bool cur = scan.divergent_at(i * stride);
        count += prev != cur;
        prev = cur;
    }
    return count;
}

BoxCountCurve boxcount_curve(const DivergenceScan& scan) {
    BoxCountCurve curve;
    curve.entries.reserve(static_cast<std::size_t>(scan.n_max) + 1);
    for (int n = 0; n <= scan.n_max; ++n) {
        curve.entries.push_back({n, std::uint64_t{1} << n, boundary_segment_count(scan, n)});
    }
    return curve;
}

FitWindow default_fit_window(const BoxCountCurve& curve, int levels) {
    if (curve.entries.empty()) throw UsageError("default_fit_window: empty curve");
    if (levels < 1) throw UsageError("default_fit_window: levels must be >= 1");
    const int n_hi = curve.entries.back().n;
    const int n_lo = std::max(curve.entries.front().n, n_hi - (levels - 1));
    return {n_lo, n_hi};
}

FractalFit fit_fractal_dimension(const BoxCountCurve& curve, FitWindow window) {
    if (window.n_lo > window.n_hi) {
        throw UsageError("fit_fractal_dimension: empty window");
    }
    if (curve.entries.empty() || window.n_lo < curve.entries.front().n ||
        window.n_hi > curve.entries.back().n) {
        throw UsageError("fit_fractal_dimension: window outside curve levels");
    }

    // log base 2 on both axes; log2(N) is the level n itself.
    std::vector<double> xs, ys;
    bool any_above_one = false;
    for (const BoxCountEntry& e : curve.entries) {
        if (e.n < window.n_lo || e.n > window.n_hi || e.count < 1) continue;
        xs.push_back(static_cast<double>(e.n));
        ys.push_back(std::log2(static_cast<double>(e.count)));
        if (e.count > 1) any_above_one = true;
    }

    FractalFit fit;
    fit.window = window;
    fit.points_used = static_cast<int>(xs.size());
    if (xs.size() < 3 || !any_above_one) {
        return fit;  // alpha = 0, std_err = 0
    }

    const double m = static_cast<double>(xs.size());
    double mean_x = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mean_x += xs[i];
        mean_y += ys[i];
    }
    mean_x /= m;
    mean_y /= m;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mean_x) * (xs[i] - mean_x);
        sxy += (xs[i] - mean_x) * (ys[i] - mean_y);
    }
    const double slope = sxy / sxx;
    const double intercept = mean_y - slope * mean_x;
    double ssr = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - (intercept + slope * xs[i]);
        ssr += r * r;
    }
    fit.alpha = slope;
    fit.std_err = std::sqrt(std::max(0.0, ssr / (m - 2.0)) / sxx);
    return fit;
}

FractalFit fit_scan(const DivergenceScan& scan, int levels) {
    const BoxCountCurve curve = boxcount_curve(scan);
    return fit_fractal_dimension(curve, default_fit_window(curve, levels));
}

}  // namespace fracbound
