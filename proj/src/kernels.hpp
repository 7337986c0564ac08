#pragma once

// Internal loss kernels. Both the landscape API and the GD engine evaluate
// losses and gradients through these structs, so trajectories recomputed via
// loss_gradient() match engine runs bit for bit.

#include <cmath>
#include <numbers>
#include <span>

#include "fracbound/errors.hpp"
#include "fracbound/landscape.hpp"

namespace fracbound::detail {

inline void sincos_pair(double a, double& s, double& c) {
#if defined(__GNUC__) || defined(__clang__)
    __builtin_sincos(a, &s, &c);
#else
    s = std::sin(a);
    c = std::cos(a);
#endif
}

inline constexpr double two_pi = 2.0 * std::numbers::pi;

struct ScalarQuadratic {
    double loss(double x) const { return x * x; }
    double loss_grad(double x, double& g) const {
        g = 2.0 * x;
        return x * x;
    }
    double second_derivative(double) const { return 2.0; }
    // Loss never goes below zero anywhere.
    double loss_lower_bound() const { return 0.0; }
};

struct ScalarAdditive {
    double eps;
    double w;  // 2*pi/lambda

    double loss(double x) const { return x * x + eps * std::cos(w * x); }
    double loss_grad(double x, double& g) const {
        double sn, cs;
        sincos_pair(w * x, sn, cs);
        g = 2.0 * x - eps * w * sn;
        return x * x + eps * cs;
    }
    double second_derivative(double x) const { return 2.0 - eps * w * w * std::cos(w * x); }
    double loss_lower_bound() const { return -eps; }
};

struct ScalarMultiplicative {
    double eps;
    double w;

    double loss(double x) const { return x * x * (1.0 + eps * std::cos(w * x)); }
    double loss_grad(double x, double& g) const {
        double sn, cs;
        sincos_pair(w * x, sn, cs);
        const double q = x * x;
        g = 2.0 * x * (1.0 + eps * cs) - q * eps * w * sn;
        return q * (1.0 + eps * cs);
    }
    // d^2f/dx^2 = 2 + 2*eps*cos(u) - 4*eps*u*sin(u) - eps*u^2*cos(u), u = w*x
    double second_derivative(double x) const {
        double sn, cs;
        const double u = w * x;
        sincos_pair(u, sn, cs);
        return 2.0 + 2.0 * eps * cs - 4.0 * eps * u * sn - eps * u * u * cs;
    }
    double loss_lower_bound() const { return 0.0; }
};

struct ScalarTwoCosine {
    double eps1;
    double w1;
    double eps2;
    double w2;

    double loss(double x) const {
        return x * x + eps1 * std::cos(w1 * x) + eps2 * std::cos(w2 * x);
    }
    double loss_grad(double x, double& g) const {
        double s1, c1, s2, c2;
        sincos_pair(w1 * x, s1, c1);
        sincos_pair(w2 * x, s2, c2);
        g = 2.0 * x - eps1 * w1 * s1 - eps2 * w2 * s2;
        return x * x + eps1 * c1 + eps2 * c2;
    }
    double second_derivative(double x) const {
        return 2.0 - eps1 * w1 * w1 * std::cos(w1 * x) - eps2 * w2 * w2 * std::cos(w2 * x);
    }
    double loss_lower_bound() const { return -(eps1 + eps2); }
};

struct NdQuadratic {
    double loss(std::span<const double> x) const {
        double s2 = 0.0;
        for (double xi : x) s2 += xi * xi;
        return s2;
    }
    double loss_grad(std::span<const double> x, std::span<double> g,
                     std::span<double> /*scratch*/) const {
        double s2 = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            s2 += x[i] * x[i];
            g[i] = 2.0 * x[i];
        }
        return s2;
    }
    double loss_lower_bound(int) const { return 0.0; }
};

struct NdAdditive {
    double eps;
    double w;

    double loss(std::span<const double> x) const {
        double s2 = 0.0, sc = 0.0;
        for (double xi : x) {
            s2 += xi * xi;
            sc += std::cos(w * xi);
        }
        return s2 + eps * sc;
    }
    double loss_grad(std::span<const double> x, std::span<double> g,
                     std::span<double> /*scratch*/) const {
        double s2 = 0.0, sc = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            double sn, cs;
            sincos_pair(w * x[i], sn, cs);
            s2 += x[i] * x[i];
            sc += cs;
            g[i] = 2.0 * x[i] - eps * w * sn;
        }
        return s2 + eps * sc;
    }
    double loss_lower_bound(int dim) const { return -eps * static_cast<double>(dim); }
};

struct NdMultiplicative {
    double eps;
    double w;

    double loss(std::span<const double> x) const {
        double s2 = 0.0, sc = 0.0;
        for (double xi : x) {
            s2 += xi * xi;
            sc += std::cos(w * xi);
        }
        return (1.0 + eps * sc) * s2;
    }
    // Needs the per-component sines twice; scratch holds them between passes.
    double loss_grad(std::span<const double> x, std::span<double> g,
                     std::span<double> scratch) const {
        double s2 = 0.0, sc = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            double sn, cs;
            sincos_pair(w * x[i], sn, cs);
            s2 += x[i] * x[i];
            sc += cs;
            scratch[i] = sn;
        }
        const double factor = 1.0 + eps * sc;
        for (std::size_t i = 0; i < x.size(); ++i) {
            g[i] = 2.0 * x[i] * factor - s2 * eps * w * scratch[i];
        }
        return factor * s2;
    }
    double loss_lower_bound(int /*dim*/) const { return 0.0; }
};

// True when the spec evaluates through the scalar kernels. ND families with
// dim == 1 reduce to the scalar formulas exactly and take this path too.
inline bool use_scalar_path(const LossSpec& spec) { return spec.dim == 1; }

template <class F>
decltype(auto) visit_scalar(const LossSpec& spec, F&& f) {
    switch (spec.family) {
        case LossFamily::Quadratic:
            return f(ScalarQuadratic{});
        case LossFamily::AdditiveCosine:
        case LossFamily::AdditiveCosineND:
            return f(ScalarAdditive{spec.epsilon, two_pi / spec.lambda});
        case LossFamily::MultiplicativeCosine:
        case LossFamily::MultiplicativeCosineND:
            return f(ScalarMultiplicative{spec.epsilon, two_pi / spec.lambda});
        case LossFamily::TwoCosineAdditive:
            return f(ScalarTwoCosine{spec.epsilon, two_pi / spec.lambda, spec.epsilon2,
                                     two_pi / spec.lambda2});
    }
    throw UsageError("unknown loss family");
}

template <class F>
decltype(auto) visit_nd(const LossSpec& spec, F&& f) {
    switch (spec.family) {
        case LossFamily::Quadratic:
            return f(NdQuadratic{});
        case LossFamily::AdditiveCosineND:
            return f(NdAdditive{spec.epsilon, two_pi / spec.lambda});
        case LossFamily::MultiplicativeCosineND:
            return f(NdMultiplicative{spec.epsilon, two_pi / spec.lambda});
        default:
            throw UsageError("family requires dim == 1");
    }
}

// Most negative value the loss can take along any trajectory; used to decide
// when a running loss sum can no longer dip back under a threshold.
inline double loss_lower_bound(const LossSpec& spec) {
    switch (spec.family) {
        case LossFamily::Quadratic:
            return 0.0;
        case LossFamily::AdditiveCosine:
            return -spec.epsilon;
        case LossFamily::MultiplicativeCosine:
            return 0.0;
        case LossFamily::TwoCosineAdditive:
            return -(spec.epsilon + spec.epsilon2);
        case LossFamily::AdditiveCosineND:
            return -spec.epsilon * static_cast<double>(spec.dim);
        case LossFamily::MultiplicativeCosineND:
            return 0.0;
    }
    return 0.0;
}

}  // namespace fracbound::detail
