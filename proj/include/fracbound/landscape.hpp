#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fracbound {

// Loss families built from the quadratic base f0(x) = sum_i x_i^2 plus a
// cosine perturbation that is either added to or multiplied onto the base.
enum class LossFamily {
    Quadratic,                // f0, any dimension
    AdditiveCosine,           // x^2 + eps*cos(2*pi*x/lambda), 1-d
    MultiplicativeCosine,     // x^2 * (1 + eps*cos(2*pi*x/lambda)), 1-d
    TwoCosineAdditive,        // x^2 + eps*cos(.) + eps2*cos(.), 1-d
    AdditiveCosineND,         // sum x_i^2 + eps*sum cos(2*pi*x_i/lambda)
    MultiplicativeCosineND,   // (1 + eps*sum cos(2*pi*x_i/lambda)) * sum x_i^2
};

const char* family_name(LossFamily family);
std::optional<LossFamily> family_from_name(const std::string& name);

// Full description of one loss instance. epsilon/lambda are the perturbation
// amplitude and wavelength; epsilon2/lambda2 belong to the second cosine of
// TwoCosineAdditive and are ignored elsewhere.
struct LossSpec {
    LossFamily family = LossFamily::Quadratic;
    double epsilon = 0.0;
    double lambda = 1.0;
    double epsilon2 = 0.0;
    double lambda2 = 1.0;
    int dim = 1;
};

LossSpec make_quadratic(int dim = 1);
LossSpec make_additive_cosine(double epsilon, double lambda);
LossSpec make_multiplicative_cosine(double epsilon, double lambda);
LossSpec make_two_cosine(double eps1, double lambda1, double eps2, double lambda2);
LossSpec make_additive_cosine_nd(double epsilon, double lambda, int dim);
LossSpec make_multiplicative_cosine_nd(double epsilon, double lambda, int dim);

// True for the families that are only defined for dim == 1.
bool is_scalar_family(LossFamily family);

// Throws UsageError when the spec violates its invariants (lambda <= 0,
// negative amplitudes, dim < 1, scalar family with dim != 1, ...).
void validate(const LossSpec& spec);

double loss_value(const LossSpec& spec, std::span<const double> x);
void loss_gradient(const LossSpec& spec, std::span<const double> x, std::span<double> grad);
std::vector<double> loss_gradient(const LossSpec& spec, std::span<const double> x);

// Scalar convenience wrappers for dim == 1 specs.
double loss_value(const LossSpec& spec, double x);
double loss_gradient_1d(const LossSpec& spec, double x);

// Analytic d^2f/dx^2. Only defined for dim == 1; throws UsageError otherwise.
double second_derivative(const LossSpec& spec, double x);

struct ConvexityReport {
    double min_second_derivative = 0.0;
    double argmin_x = 0.0;
    double region_lo = 0.0;
    double region_hi = 0.0;
    bool is_convex = false;  // min_second_derivative >= 0
};

// Dense-grid minimization of the second derivative over [x_lo, x_hi] at
// `samples` evenly spaced points, followed by golden-section refinement on
// the bracketing interval (tolerance 1e-10 in x).
ConvexityReport min_second_derivative(const LossSpec& spec, double x_lo, double x_hi,
                                      long samples);

// Default sampling density used by callers that pick their own region:
// 1e5 points per unit length, floored at 1001 points.
long default_convexity_samples(double x_lo, double x_hi);

enum class RoughnessKind { Additive, Multiplicative };

struct RoughnessValue {
    double theta = 0.0;
    RoughnessKind kind = RoughnessKind::Additive;
};

// theta_plus = eps/lambda^2 for the additive families,
// theta_times = eps for the multiplicative families.
// Other families have no single scalar invariant and throw UsageError.
RoughnessValue roughness(const LossSpec& spec);

// The additive family first becomes non-convex at theta_plus = 1/(2*pi^2);
// that is also where its trainability boundary turns fractal.
double critical_additive_roughness();

// Rescaling x -> x/b with loss renormalized by zeta = b^2 keeps the GD
// iteration form and the learning rate unchanged.
struct RenormMap {
    double b = 1.0;
    double zeta = 1.0;  // always b^2

    static RenormMap from_factor(double b);
};

struct RenormalizedSystem {
    LossSpec spec;
    std::vector<double> x0;
    double zeta = 1.0;  // factor by which loss values (and thresholds) scale
};

// Additive: (eps, lambda) -> (eps/b^2, lambda/b). Multiplicative:
// (eps, lambda) -> (eps, lambda/b). Two-cosine transforms both cosine terms
// additively. 1-d specs only.
RenormalizedSystem renormalize(const LossSpec& spec, std::span<const double> x0,
                               const RenormMap& map);

// Smallest common period of the two cosines when lambda1/lambda2 is (close
// to) rational; falls back to 100*max(lambda1, lambda2).
double common_period(double lambda1, double lambda2);

// The eps2 >= 0 at which min_x d^2f/dx^2 = 0 for the two-cosine loss with
// the given eps1, found by bisection over one common period. Empty when
// eps1 alone already makes the loss non-convex.
std::optional<double> two_cosine_convexity_boundary(double lambda1, double lambda2,
                                                    double eps1);

// Amplitude at which the multiplicative loss restricted to |x| < sqrt(f_max)
// stops being convex: eps = (1/f_max) * lambda^2 / (2*pi^2).
double fmax_convexity_boundary(double lambda, double f_max);

}  // namespace fracbound
