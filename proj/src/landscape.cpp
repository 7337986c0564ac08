#include "fracbound/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "fracbound/errors.hpp"
#include "kernels.hpp"

namespace fracbound {

namespace {

constexpr double pi = std::numbers::pi;

void require(bool cond, const char* msg) {
    if (!cond) throw UsageError(msg);
}

}  // namespace

const char* family_name(LossFamily family) {
    switch (family) {
        case LossFamily::Quadratic: return "quadratic";
        case LossFamily::AdditiveCosine: return "additive_cosine";
        case LossFamily::MultiplicativeCosine: return "multiplicative_cosine";
        case LossFamily::TwoCosineAdditive: return "two_cosine_additive";
        case LossFamily::AdditiveCosineND: return "additive_cosine_nd";
        case LossFamily::MultiplicativeCosineND: return "multiplicative_cosine_nd";
    }
    return "unknown";
}

std::optional<LossFamily> family_from_name(const std::string& name) {
    for (LossFamily f : {LossFamily::Quadratic, LossFamily::AdditiveCosine,
                         LossFamily::MultiplicativeCosine, LossFamily::TwoCosineAdditive,
                         LossFamily::AdditiveCosineND, LossFamily::MultiplicativeCosineND}) {
        if (name == family_name(f)) return f;
    }
    return std::nullopt;
}

LossSpec make_quadratic(int dim) {
    LossSpec s;
    s.family = LossFamily::Quadratic;
    s.dim = dim;
    validate(s);
    return s;
}

LossSpec make_additive_cosine(double epsilon, double lambda) {
    LossSpec s;
    s.family = LossFamily::AdditiveCosine;
    s.epsilon = epsilon;
    s.lambda = lambda;
    validate(s);
    return s;
}

LossSpec make_multiplicative_cosine(double epsilon, double lambda) {
    LossSpec s;
    s.family = LossFamily::MultiplicativeCosine;
    s.epsilon = epsilon;
    s.lambda = lambda;
    validate(s);
    return s;
}

LossSpec make_two_cosine(double eps1, double lambda1, double eps2, double lambda2) {
    LossSpec s;
    s.family = LossFamily::TwoCosineAdditive;
    s.epsilon = eps1;
    s.lambda = lambda1;
    s.epsilon2 = eps2;
    s.lambda2 = lambda2;
    validate(s);
    return s;
}

LossSpec make_additive_cosine_nd(double epsilon, double lambda, int dim) {
    LossSpec s;
    s.family = LossFamily::AdditiveCosineND;
    s.epsilon = epsilon;
    s.lambda = lambda;
    s.dim = dim;
    validate(s);
    return s;
}

LossSpec make_multiplicative_cosine_nd(double epsilon, double lambda, int dim) {
    LossSpec s;
    s.family = LossFamily::MultiplicativeCosineND;
    s.epsilon = epsilon;
    s.lambda = lambda;
    s.dim = dim;
    validate(s);
    return s;
}

bool is_scalar_family(LossFamily family) {
    return family == LossFamily::AdditiveCosine || family == LossFamily::MultiplicativeCosine ||
           family == LossFamily::TwoCosineAdditive;
}

void validate(const LossSpec& spec) {
    require(spec.dim >= 1, "LossSpec: dim must be >= 1");
    if (is_scalar_family(spec.family)) {
        require(spec.dim == 1, "LossSpec: scalar family requires dim == 1");
    }
    if (spec.family != LossFamily::Quadratic) {
        require(std::isfinite(spec.epsilon) && spec.epsilon >= 0.0,
                "LossSpec: epsilon must be finite and >= 0");
        require(std::isfinite(spec.lambda) && spec.lambda > 0.0,
                "LossSpec: lambda must be finite and > 0");
    }
    if (spec.family == LossFamily::TwoCosineAdditive) {
        require(std::isfinite(spec.epsilon2) && spec.epsilon2 >= 0.0,
                "LossSpec: epsilon2 must be finite and >= 0");
        require(std::isfinite(spec.lambda2) && spec.lambda2 > 0.0,
                "LossSpec: lambda2 must be finite and > 0");
    }
}

namespace {

void check_input(const LossSpec& spec, std::span<const double> x) {
    validate(spec);
    if (static_cast<int>(x.size()) != spec.dim) {
        throw UsageError("parameter vector length does not match LossSpec dim");
    }
}

}  // namespace

double loss_value(const LossSpec& spec, std::span<const double> x) {
    check_input(spec, x);
    if (detail::use_scalar_path(spec)) {
        return detail::visit_scalar(spec, [&](const auto& k) { return k.loss(x[0]); });
    }
    return detail::visit_nd(spec, [&](const auto& k) { return k.loss(x); });
}

void loss_gradient(const LossSpec& spec, std::span<const double> x, std::span<double> grad) {
    check_input(spec, x);
    if (grad.size() != x.size()) {
        throw UsageError("gradient buffer length does not match LossSpec dim");
    }
    if (detail::use_scalar_path(spec)) {
        detail::visit_scalar(spec, [&](const auto& k) {
            double g;
            k.loss_grad(x[0], g);
            grad[0] = g;
        });
        return;
    }
    std::vector<double> scratch(x.size());
    detail::visit_nd(spec, [&](const auto& k) { k.loss_grad(x, grad, scratch); });
}

std::vector<double> loss_gradient(const LossSpec& spec, std::span<const double> x) {
    std::vector<double> grad(x.size());
    loss_gradient(spec, x, grad);
    return grad;
}

double loss_value(const LossSpec& spec, double x) {
    return loss_value(spec, std::span<const double>(&x, 1));
}

double loss_gradient_1d(const LossSpec& spec, double x) {
    double g;
    loss_gradient(spec, std::span<const double>(&x, 1), std::span<double>(&g, 1));
    return g;
}

double second_derivative(const LossSpec& spec, double x) {
    validate(spec);
    if (spec.dim != 1) {
        throw UsageError("second_derivative is only defined for dim == 1");
    }
    return detail::visit_scalar(spec, [&](const auto& k) { return k.second_derivative(x); });
}

long default_convexity_samples(double x_lo, double x_hi) {
    const double span = x_hi - x_lo;
    const double wanted = std::ceil(1e5 * span);
    return std::max(1001L, static_cast<long>(wanted));
}

namespace {

// Golden-section minimization of f over [lo, hi] to absolute x tolerance.
template <class F>
double golden_section_min(F&& f, double lo, double hi, double tol) {
    constexpr double inv_phi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > tol) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace

ConvexityReport min_second_derivative(const LossSpec& spec, double x_lo, double x_hi,
                                      long samples) {
    validate(spec);
    if (spec.dim != 1) throw UsageError("min_second_derivative requires dim == 1");
    if (!(std::isfinite(x_lo) && std::isfinite(x_hi) && x_lo < x_hi)) {
        throw UsageError("min_second_derivative: invalid region");
    }
    if (samples < 2) throw UsageError("min_second_derivative: samples must be >= 2");

    return detail::visit_scalar(spec, [&](const auto& k) {
        const double step = (x_hi - x_lo) / static_cast<double>(samples - 1);
        double best_x = x_lo;
        double best_v = k.second_derivative(x_lo);
        for (long i = 1; i < samples; ++i) {
            const double x = x_lo + static_cast<double>(i) * step;
            const double v = k.second_derivative(x);
            if (v < best_v) {
                best_v = v;
                best_x = x;
            }
        }
        const double lo = std::max(x_lo, best_x - step);
        const double hi = std::min(x_hi, best_x + step);
        const double refined =
            golden_section_min([&](double x) { return k.second_derivative(x); }, lo, hi, 1e-10);
        const double refined_v = k.second_derivative(refined);
        if (refined_v < best_v) {
            best_v = refined_v;
            best_x = refined;
        }

        ConvexityReport report;
        report.min_second_derivative = best_v;
        report.argmin_x = best_x;
        report.region_lo = x_lo;
        report.region_hi = x_hi;
        report.is_convex = best_v >= 0.0;
        return report;
    });
}

RoughnessValue roughness(const LossSpec& spec) {
    validate(spec);
    switch (spec.family) {
        case LossFamily::AdditiveCosine:
        case LossFamily::AdditiveCosineND:
            return {spec.epsilon / (spec.lambda * spec.lambda), RoughnessKind::Additive};
        case LossFamily::MultiplicativeCosine:
        case LossFamily::MultiplicativeCosineND:
            return {spec.epsilon, RoughnessKind::Multiplicative};
        default:
            throw UsageError("roughness is only defined for single-cosine families");
    }
}

double critical_additive_roughness() { return 1.0 / (2.0 * pi * pi); }

RenormMap RenormMap::from_factor(double b) {
    if (!(std::isfinite(b) && b > 0.0)) {
        throw UsageError("RenormMap: rescale factor b must be finite and > 0");
    }
    return RenormMap{b, b * b};
}

RenormalizedSystem renormalize(const LossSpec& spec, std::span<const double> x0,
                               const RenormMap& map) {
    check_input(spec, x0);
    if (!(std::isfinite(map.b) && map.b > 0.0)) {
        throw UsageError("renormalize: b must be finite and > 0");
    }
    if (map.zeta != map.b * map.b) {
        throw UsageError("renormalize: map violates zeta = b^2");
    }
    if (spec.dim != 1) {
        throw UsageError("renormalize connects 1-d losses only");
    }

    const double b = map.b;
    LossSpec out = spec;
    switch (spec.family) {
        case LossFamily::Quadratic:
            break;
        case LossFamily::AdditiveCosine:
        case LossFamily::AdditiveCosineND:
            out.epsilon = spec.epsilon / (b * b);
            out.lambda = spec.lambda / b;
            break;
        case LossFamily::MultiplicativeCosine:
        case LossFamily::MultiplicativeCosineND:
            out.lambda = spec.lambda / b;
            break;
        case LossFamily::TwoCosineAdditive:
            out.epsilon = spec.epsilon / (b * b);
            out.lambda = spec.lambda / b;
            out.epsilon2 = spec.epsilon2 / (b * b);
            out.lambda2 = spec.lambda2 / b;
            break;
    }

    RenormalizedSystem result;
    result.spec = out;
    result.x0.assign(x0.begin(), x0.end());
    for (double& v : result.x0) v /= b;
    result.zeta = map.zeta;
    return result;
}

double common_period(double lambda1, double lambda2) {
    if (!(lambda1 > 0.0 && lambda2 > 0.0)) {
        throw UsageError("common_period: wavelengths must be > 0");
    }
    // Continued-fraction approximation of lambda1/lambda2 by p/q.
    const double ratio = lambda1 / lambda2;
    long p_prev = 1, q_prev = 0;
    long p = static_cast<long>(std::floor(ratio)), q = 1;
    double frac = ratio - std::floor(ratio);
    for (int iter = 0; iter < 32 && q <= 1000; ++iter) {
        if (std::abs(ratio - static_cast<double>(p) / static_cast<double>(q)) < 1e-9) {
            // q * lambda1 == p * lambda2 is the least common period.
            return static_cast<double>(q) * lambda1;
        }
        if (frac < 1e-12) break;
        frac = 1.0 / frac;
        const long a = static_cast<long>(std::floor(frac));
        frac -= std::floor(frac);
        const long p_next = a * p + p_prev;
        const long q_next = a * q + q_prev;
        p_prev = p;
        q_prev = q;
        p = p_next;
        q = q_next;
    }
    return 100.0 * std::max(lambda1, lambda2);
}

std::optional<double> two_cosine_convexity_boundary(double lambda1, double lambda2,
                                                    double eps1) {
    if (!(lambda1 > 0.0 && lambda2 > 0.0)) {
        throw UsageError("two_cosine_convexity_boundary: wavelengths must be > 0");
    }
    if (!(std::isfinite(eps1) && eps1 >= 0.0)) {
        throw UsageError("two_cosine_convexity_boundary: eps1 must be >= 0");
    }

    const double period = common_period(lambda1, lambda2);
    const double half = 0.5 * period;
    const long samples = default_convexity_samples(-half, half);

    const auto min_curvature = [&](double eps2) {
        const LossSpec spec = make_two_cosine(eps1, lambda1, eps2, lambda2);
        return min_second_derivative(spec, -half, half, samples).min_second_derivative;
    };

    if (min_curvature(0.0) < 0.0) {
        return std::nullopt;  // eps1 alone already makes the loss non-convex
    }

    // Root is at most lambda2^2/(2*pi^2): both cosines peak together at x=0.
    double lo = 0.0;
    double hi = lambda2 * lambda2 / (2.0 * pi * pi);
    if (min_curvature(hi) > 0.0) {
        hi *= 1.0 + 1e-9;  // guard against rounding at the exact boundary
        if (min_curvature(hi) > 0.0) return std::nullopt;
    }
    for (int iter = 0; iter < 100 && hi - lo > 1e-12; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (min_curvature(mid) < 0.0) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double fmax_convexity_boundary(double lambda, double f_max) {
    if (!(std::isfinite(lambda) && lambda > 0.0)) {
        throw UsageError("fmax_convexity_boundary: lambda must be > 0");
    }
    if (!(std::isfinite(f_max) && f_max > 0.0)) {
        throw UsageError("fmax_convexity_boundary: f_max must be > 0");
    }
    return (1.0 / f_max) * lambda * lambda / (2.0 * pi * pi);
}

}  // namespace fracbound
