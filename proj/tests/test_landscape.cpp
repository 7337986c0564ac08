#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "fracbound/errors.hpp"
#include "fracbound/landscape.hpp"

using namespace fracbound;

namespace {

constexpr double pi = std::numbers::pi;

// Independent oracle: central finite difference of loss_value.
std::vector<double> fd_gradient(const LossSpec& spec, std::vector<double> x, double h = 1e-6) {
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double xi = x[i];
        x[i] = xi + h;
        const double fp = loss_value(spec, std::span<const double>(x));
        x[i] = xi - h;
        const double fm = loss_value(spec, std::span<const double>(x));
        x[i] = xi;
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1.0});
}

}  // namespace

TEST_CASE("loss values match the closed forms") {
    CHECK(loss_value(make_quadratic(), 1.0) == 1.0);
    CHECK(loss_value(make_additive_cosine(0.2, 0.1), 0.0) == doctest::Approx(0.2).epsilon(1e-15));
    // cos(pi) = -1, so 0.05^2 * (1 - 0.2)
    CHECK(loss_value(make_multiplicative_cosine(0.2, 0.1), 0.05) ==
          doctest::Approx(0.002).epsilon(1e-12));
    // two cosines both at phase 0
    CHECK(loss_value(make_two_cosine(0.1, 0.3, 0.05, 0.5), 0.0) ==
          doctest::Approx(0.15).epsilon(1e-15));
}

TEST_CASE("quadratic equals the additive ND family at eps = 0") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> coord(-5.0, 5.0);
    for (int dim : {1, 3, 10}) {
        const LossSpec quad = make_quadratic(dim);
        const LossSpec add0 = make_additive_cosine_nd(0.0, 0.37, dim);
        for (int rep = 0; rep < 20; ++rep) {
            std::vector<double> x(dim);
            for (double& v : x) v = coord(rng);
            CHECK(loss_value(quad, std::span<const double>(x)) ==
                  loss_value(add0, std::span<const double>(x)));
        }
    }
}

TEST_CASE("gradients match the stated formulas at simple points") {
    CHECK(loss_gradient_1d(make_additive_cosine(0.2, 0.1), 0.0) == 0.0);
    CHECK(loss_gradient_1d(make_quadratic(), 1.0) == 2.0);
    // sin(pi) drops the second term: 2*0.05*(1 - 0.2)
    CHECK(loss_gradient_1d(make_multiplicative_cosine(0.2, 0.1), 0.05) ==
          doctest::Approx(0.08).epsilon(1e-12));
}

TEST_CASE("analytic gradients agree with central finite differences") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> coord(-5.0, 5.0);

    std::vector<LossSpec> scalar_specs = {
        make_quadratic(),
        make_additive_cosine(0.2, 0.1),
        make_additive_cosine(0.05, 0.7),
        make_multiplicative_cosine(0.2, 0.1),
        make_multiplicative_cosine(0.01, 0.33),
        make_two_cosine(0.1, 0.3, 0.05, 0.5),
    };
    for (const LossSpec& spec : scalar_specs) {
        for (int rep = 0; rep < 100; ++rep) {
            std::vector<double> x = {coord(rng)};
            const auto analytic = loss_gradient(spec, std::span<const double>(x));
            const auto fd = fd_gradient(spec, x);
            CHECK(rel_err(analytic[0], fd[0]) < 1e-6);
        }
    }

    for (int dim : {1, 3, 10}) {
        std::vector<LossSpec> nd_specs = {
            make_quadratic(dim),
            make_additive_cosine_nd(0.2, 0.1, dim),
            make_multiplicative_cosine_nd(0.2, 0.1, dim),
        };
        for (const LossSpec& spec : nd_specs) {
            for (int rep = 0; rep < 100; ++rep) {
                std::vector<double> x(dim);
                for (double& v : x) v = coord(rng);
                const auto analytic = loss_gradient(spec, std::span<const double>(x));
                const auto fd = fd_gradient(spec, x);
                for (int i = 0; i < dim; ++i) {
                    CHECK(rel_err(analytic[i], fd[i]) < 1e-6);
                }
            }
        }
    }
}

TEST_CASE("non-finite inputs propagate") {
    const double inf = std::numeric_limits<double>::infinity();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    CHECK(!std::isfinite(loss_value(make_additive_cosine(0.2, 0.1), inf)));
    CHECK(std::isnan(loss_value(make_quadratic(), nan)));
}

TEST_CASE("dimension mismatches are usage errors") {
    const LossSpec spec = make_additive_cosine(0.2, 0.1);
    std::vector<double> x = {1.0, 2.0};
    CHECK_THROWS_AS(loss_value(spec, std::span<const double>(x)), UsageError);
    CHECK_THROWS_AS(loss_gradient(spec, std::span<const double>(x)), UsageError);

    LossSpec bad = spec;
    bad.lambda = 0.0;
    CHECK_THROWS_AS(validate(bad), UsageError);
    bad = spec;
    bad.epsilon = -0.1;
    CHECK_THROWS_AS(validate(bad), UsageError);
    bad = spec;
    bad.dim = 2;
    CHECK_THROWS_AS(validate(bad), UsageError);
    CHECK_THROWS_AS(make_quadratic(0), UsageError);
}

TEST_CASE("second derivative closed forms") {
    const double w = 2.0 * pi / 0.1;
    CHECK(second_derivative(make_additive_cosine(0.2, 0.1), 0.0) ==
          doctest::Approx(2.0 - 0.2 * w * w).epsilon(1e-14));
    CHECK(second_derivative(make_quadratic(), 123.4) == 2.0);
    CHECK(second_derivative(make_multiplicative_cosine(0.2, 0.1), 0.0) ==
          doctest::Approx(2.0 + 2.0 * 0.2).epsilon(1e-14));
    CHECK_THROWS_AS(second_derivative(make_quadratic(3), 0.0), UsageError);
}

TEST_CASE("second derivative agrees with a finite-difference oracle") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> coord(-2.0, 2.0);
    std::vector<LossSpec> specs = {
        make_additive_cosine(0.2, 0.1),
        make_multiplicative_cosine(0.2, 0.1),
        make_two_cosine(0.1, 0.3, 0.05, 0.5),
    };
    const double h = 1e-5;
    for (const LossSpec& spec : specs) {
        for (int rep = 0; rep < 50; ++rep) {
            const double x = coord(rng);
            const double fd = (loss_value(spec, x + h) - 2.0 * loss_value(spec, x) +
                               loss_value(spec, x - h)) /
                              (h * h);
            CHECK(rel_err(second_derivative(spec, x), fd) < 1e-4);
        }
    }
}

TEST_CASE("min_second_derivative finds the analytic minimum") {
    SUBCASE("strongly non-convex additive") {
        const auto report =
            min_second_derivative(make_additive_cosine(0.2, 0.1), -2.0, 2.0,
                                  default_convexity_samples(-2.0, 2.0));
        const double w = 2.0 * pi / 0.1;
        CHECK(report.min_second_derivative == doctest::Approx(2.0 - 0.2 * w * w).epsilon(1e-10));
        CHECK(!report.is_convex);
        CHECK(report.argmin_x >= report.region_lo);
        CHECK(report.argmin_x <= report.region_hi);
    }
    SUBCASE("weakly perturbed additive stays convex") {
        const auto report =
            min_second_derivative(make_additive_cosine(0.001, 1.0), -2.0, 2.0,
                                  default_convexity_samples(-2.0, 2.0));
        CHECK(report.min_second_derivative ==
              doctest::Approx(2.0 - 0.001 * 4.0 * pi * pi).epsilon(1e-10));
        CHECK(report.is_convex);
    }
    SUBCASE("multiplicative minimum tracks the loss-cap approximation") {
        // Dense-grid oracle vs the large-|x| approximation 2 - eps*f_max*(2*pi/lambda)^2.
        const double f_max = 1000.0;
        const double r = std::sqrt(f_max);
        const auto report = min_second_derivative(make_multiplicative_cosine(0.2, 0.1), -r, r,
                                                  default_convexity_samples(-r, r));
        const double w = 2.0 * pi / 0.1;
        const double approx = 2.0 - 0.2 * f_max * w * w;
        CHECK(std::abs(report.min_second_derivative - approx) < 0.05 * std::abs(approx));
    }
    SUBCASE("invalid regions are usage errors") {
        CHECK_THROWS_AS(min_second_derivative(make_quadratic(), 2.0, -2.0, 100), UsageError);
        CHECK_THROWS_AS(min_second_derivative(make_quadratic(), 0.0, 1.0, 1), UsageError);
    }
}

TEST_CASE("roughness invariants") {
    CHECK(roughness(make_additive_cosine(0.2, 0.1)).theta == doctest::Approx(20.0).epsilon(1e-15));
    CHECK(roughness(make_additive_cosine(0.2, 0.1)).kind == RoughnessKind::Additive);
    CHECK(roughness(make_multiplicative_cosine(0.2, 0.1)).theta == 0.2);
    CHECK(roughness(make_multiplicative_cosine(0.2, 0.1)).kind == RoughnessKind::Multiplicative);

    for (double lam : {0.1, 1.0, 3.0}) {
        const double eps = lam * lam / (2.0 * pi * pi);
        CHECK(roughness(make_additive_cosine(eps, lam)).theta ==
              doctest::Approx(critical_additive_roughness()).epsilon(1e-14));
    }
    CHECK(critical_additive_roughness() == doctest::Approx(0.050660).epsilon(1e-4));

    CHECK_THROWS_AS(roughness(make_quadratic()), UsageError);
    CHECK_THROWS_AS(roughness(make_two_cosine(0.1, 0.3, 0.05, 0.5)), UsageError);
}

TEST_CASE("renormalize transforms parameters and rescales x0") {
    const std::vector<double> x0 = {1.0};

    SUBCASE("additive") {
        const auto sys = renormalize(make_additive_cosine(0.2, 0.1),
                                     std::span<const double>(x0), RenormMap::from_factor(2.0));
        CHECK(sys.spec.epsilon == 0.05);
        CHECK(sys.spec.lambda == 0.05);
        CHECK(sys.x0[0] == 0.5);
        CHECK(sys.zeta == 4.0);
    }
    SUBCASE("multiplicative keeps eps") {
        const auto sys =
            renormalize(make_multiplicative_cosine(0.2, 0.1), std::span<const double>(x0),
                        RenormMap::from_factor(2.0));
        CHECK(sys.spec.epsilon == 0.2);
        CHECK(sys.spec.lambda == 0.05);
        CHECK(sys.zeta == 4.0);
    }
    SUBCASE("b = 1 is the identity") {
        const auto sys = renormalize(make_additive_cosine(0.2, 0.1),
                                     std::span<const double>(x0), RenormMap::from_factor(1.0));
        CHECK(sys.spec.epsilon == 0.2);
        CHECK(sys.spec.lambda == 0.1);
        CHECK(sys.x0[0] == 1.0);
        CHECK(sys.zeta == 1.0);
    }
    SUBCASE("invalid factors") {
        CHECK_THROWS_AS(RenormMap::from_factor(0.0), UsageError);
        CHECK_THROWS_AS(RenormMap::from_factor(-2.0), UsageError);
        RenormMap broken{2.0, 3.0};
        CHECK_THROWS_AS(
            renormalize(make_additive_cosine(0.2, 0.1), std::span<const double>(x0), broken),
            UsageError);
    }
}

TEST_CASE("roughness is invariant under renormalization") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> eps_dist(0.001, 0.5);
    std::uniform_real_distribution<double> lam_dist(0.02, 2.0);
    std::uniform_real_distribution<double> b_dist(0.1, 10.0);
    const std::vector<double> x0 = {1.0};

    for (int rep = 0; rep < 200; ++rep) {
        const double eps = eps_dist(rng);
        const double lam = lam_dist(rng);
        const double b = b_dist(rng);
        for (const LossSpec& spec :
             {make_additive_cosine(eps, lam), make_multiplicative_cosine(eps, lam)}) {
            const auto sys =
                renormalize(spec, std::span<const double>(x0), RenormMap::from_factor(b));
            CHECK(roughness(sys.spec).theta ==
                  doctest::Approx(roughness(spec).theta).epsilon(1e-12));
        }
    }
    // Powers of two keep the invariance exact in binary64.
    for (double b : {0.5, 2.0, 4.0}) {
        const LossSpec spec = make_additive_cosine(0.2, 0.1);
        const auto sys = renormalize(spec, std::span<const double>(x0), RenormMap::from_factor(b));
        CHECK(roughness(sys.spec).theta == roughness(spec).theta);
    }
}

TEST_CASE("additive convexity flips exactly at the critical roughness") {
    for (double lam : {0.1, 0.5, 1.0}) {
        const double eps_crit = lam * lam / (2.0 * pi * pi);
        const auto below = min_second_derivative(make_additive_cosine(eps_crit * 0.99, lam),
                                                 -lam, lam, 200001);
        const auto above = min_second_derivative(make_additive_cosine(eps_crit * 1.01, lam),
                                                 -lam, lam, 200001);
        CHECK(below.is_convex);
        CHECK(!above.is_convex);
    }
}

TEST_CASE("multiplicative losses go non-convex on large enough regions") {
    const LossSpec spec = make_multiplicative_cosine(0.01, 0.5);
    const auto small = min_second_derivative(spec, -1.0, 1.0, 100001);
    const auto large = min_second_derivative(spec, -50.0, 50.0, 2000001);
    CHECK(small.min_second_derivative > large.min_second_derivative);
    CHECK(!large.is_convex);
}

TEST_CASE("common period of commensurate wavelengths") {
    CHECK(common_period(0.3, 0.5) == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(common_period(0.5, 0.3) == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(common_period(1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(common_period(0.25, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("two-cosine convexity boundary matches the closed form") {
    // Both cosines peak at x = 0, so the boundary is
    // eps1/lambda1^2 + eps2/lambda2^2 = 1/(2*pi^2).
    const double closed_eps2 = 0.25 / (2.0 * pi * pi);
    const auto at_zero = two_cosine_convexity_boundary(0.3, 0.5, 0.0);
    REQUIRE(at_zero.has_value());
    CHECK(std::abs(*at_zero - closed_eps2) < 1e-6);
    CHECK(*at_zero == doctest::Approx(0.012665).epsilon(1e-3));

    // eps1 endpoint of the boundary curve: eps2 solves to ~0 there.
    const double eps1_end = 0.09 / (2.0 * pi * pi);
    CHECK(eps1_end == doctest::Approx(0.0045594).epsilon(1e-4));
    const auto at_end = two_cosine_convexity_boundary(0.3, 0.5, eps1_end);
    REQUIRE(at_end.has_value());
    CHECK(std::abs(*at_end) < 1e-6);

    // Equal wavelengths with eps1 = 0 reduce to the single-cosine critical value.
    for (double lam : {0.3, 1.0}) {
        const auto single = two_cosine_convexity_boundary(lam, lam, 0.0);
        REQUIRE(single.has_value());
        CHECK(std::abs(*single - lam * lam / (2.0 * pi * pi)) < 1e-6);
    }

    // Closed form along the curve interior.
    for (double frac : {0.25, 0.5, 0.75}) {
        const double eps1 = frac * 0.09 / (2.0 * pi * pi);
        const double expect = (1.0 / (2.0 * pi * pi) - eps1 / 0.09) * 0.25;
        const auto numeric = two_cosine_convexity_boundary(0.3, 0.5, eps1);
        REQUIRE(numeric.has_value());
        CHECK(std::abs(*numeric - expect) < 1e-6);
    }

    // eps1 already past the single-cosine limit: no solution.
    CHECK(!two_cosine_convexity_boundary(0.3, 0.5, 1.1 * 0.09 / (2.0 * pi * pi)).has_value());
    CHECK_THROWS_AS(two_cosine_convexity_boundary(-0.3, 0.5, 0.0), UsageError);
}

TEST_CASE("loss-cap convexity boundary") {
    CHECK(fmax_convexity_boundary(0.1, 1e3) == doctest::Approx(5.0660e-7).epsilon(1e-4));
    CHECK(fmax_convexity_boundary(1.0, 1.0) ==
          doctest::Approx(critical_additive_roughness()).epsilon(1e-14));
    // doubling lambda quadruples eps; doubling f_max halves it
    CHECK(fmax_convexity_boundary(0.2, 1e3) ==
          doctest::Approx(4.0 * fmax_convexity_boundary(0.1, 1e3)).epsilon(1e-14));
    CHECK(fmax_convexity_boundary(0.1, 2e3) ==
          doctest::Approx(0.5 * fmax_convexity_boundary(0.1, 1e3)).epsilon(1e-14));
    CHECK_THROWS_AS(fmax_convexity_boundary(0.0, 1e3), UsageError);
    CHECK_THROWS_AS(fmax_convexity_boundary(0.1, 0.0), UsageError);
}

TEST_CASE("family names round-trip") {
    for (LossFamily f : {LossFamily::Quadratic, LossFamily::AdditiveCosine,
                         LossFamily::MultiplicativeCosine, LossFamily::TwoCosineAdditive,
                         LossFamily::AdditiveCosineND, LossFamily::MultiplicativeCosineND}) {
        const auto parsed = family_from_name(family_name(f));
        REQUIRE(parsed.has_value());
        CHECK(*parsed == f);
    }
    CHECK(!family_from_name("no_such_family").has_value());
}
