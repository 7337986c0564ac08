// fracbound: gradient-descent trainability-boundary scanner and fractal
// dimension toolkit.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "fracbound/csv.hpp"
#include "fracbound/engine.hpp"
#include "fracbound/errors.hpp"
#include "fracbound/experiments.hpp"
#include "fracbound/fractal.hpp"
#include "fracbound/render.hpp"
#include "fracbound/scanfile.hpp"
#include "fracbound/version.hpp"

namespace {

using namespace fracbound;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitIntegrity = 3;
constexpr int kExitResource = 4;

struct SpecFlags {
    std::string family = "additive_cosine";
    double eps = 0.2;
    double lambda = 0.1;
    double eps2 = 0.0;
    double lambda2 = 1.0;
    int dim = 1;
};

struct RunFlags {
    std::vector<double> x0;
    int steps = 1000;
    std::string mode = "sum";
    double sum_threshold = 1e16;
    double loss_cap = 1e16;
    double s_min = 0.0;
    double s_max = 1.5;
    int n_max = 20;
    int fit_levels = 8;
};

void add_spec_flags(CLI::App& cmd, SpecFlags& f, bool with_two_cosine = true) {
    cmd.add_option("--family", f.family,
                   "Loss family: quadratic, additive_cosine, multiplicative_cosine, "
                   "two_cosine_additive, additive_cosine_nd, multiplicative_cosine_nd")
        ->capture_default_str();
    cmd.add_option("--eps", f.eps, "Perturbation amplitude")->capture_default_str();
    cmd.add_option("--lam", f.lambda, "Perturbation wavelength")->capture_default_str();
    if (with_two_cosine) {
        cmd.add_option("--eps2", f.eps2, "Second-cosine amplitude")->capture_default_str();
        cmd.add_option("--lam2", f.lambda2, "Second-cosine wavelength")->capture_default_str();
    }
    cmd.add_option("--dim", f.dim, "Parameter dimension")->capture_default_str();
}

void add_run_flags(CLI::App& cmd, RunFlags& f) {
    cmd.add_option("--x0", f.x0,
                   "Initial point; one value per coordinate, or a single value "
                   "broadcast to all (default: all ones)");
    cmd.add_option("--steps", f.steps, "GD steps per run")->capture_default_str();
    cmd.add_option("--mode", f.mode, "Divergence test: sum (running loss sum) or cap")
        ->check(CLI::IsMember({"sum", "cap"}))
        ->capture_default_str();
    cmd.add_option("--sum-threshold", f.sum_threshold, "Loss-sum divergence threshold")
        ->capture_default_str();
    cmd.add_option("--loss-cap", f.loss_cap, "Per-step loss cap (cap mode)")
        ->capture_default_str();
    cmd.add_option("--smin", f.s_min, "Smallest learning rate")->capture_default_str();
    cmd.add_option("--smax", f.s_max, "Largest learning rate")->capture_default_str();
    cmd.add_option("--nmax", f.n_max, "Grid exponent: 2^nmax + 1 points")
        ->capture_default_str();
    cmd.add_option("--fit-levels", f.fit_levels, "Coarse-grain levels used by the fit")
        ->capture_default_str();
}

LossSpec spec_from_flags(const SpecFlags& f) {
    const auto family = family_from_name(f.family);
    if (!family) throw UsageError("unknown family '" + f.family + "'");
    LossSpec spec;
    spec.family = *family;
    spec.epsilon = f.eps;
    spec.lambda = f.lambda;
    spec.epsilon2 = f.eps2;
    spec.lambda2 = f.lambda2;
    spec.dim = f.dim;
    validate(spec);
    return spec;
}

GDConfig config_from_flags(const RunFlags& f, int dim) {
    GDConfig cfg;
    if (f.x0.size() == 1 && dim > 1) {
        cfg.x0.assign(static_cast<std::size_t>(dim), f.x0[0]);
    } else {
        cfg.x0 = f.x0;
    }
    cfg.steps = f.steps;
    cfg.mode = f.mode == "cap" ? ClassifyMode::LossCap : ClassifyMode::SumThreshold;
    cfg.sum_threshold = f.sum_threshold;
    cfg.loss_cap = f.loss_cap;
    return cfg;
}

ScanSettings scan_settings_from_flags(const RunFlags& f) {
    ScanSettings scan;
    scan.s_min = f.s_min;
    scan.s_max = f.s_max;
    scan.n_max = f.n_max;
    scan.fit_levels = f.fit_levels;
    return scan;
}

void print_fit(const FractalFit& fit) {
    std::printf("alpha=%.6f stderr=%.6f window=[%d,%d] points=%d\n", fit.alpha, fit.std_err,
                fit.window.n_lo, fit.window.n_hi, fit.points_used);
}

// ---- selftest ------------------------------------------------------------

bool selftest_quadratic_baseline() {
    const DivergenceScan scan =
        scan_learning_rates(make_quadratic(), GDConfig{}, 0.0, 1.5, 14, false);
    bool ok = true;
    for (std::uint64_t i = 0; i < scan.point_count(); ++i) {
        if (scan.learning_rate_at(i) <= 1.0 && scan.divergent_at(i)) ok = false;
    }
    const BoxCountCurve curve = boxcount_curve(scan);
    for (const auto& e : curve.entries) {
        if (e.n >= 1 && e.count != 1) ok = false;
    }
    const FractalFit fit = fit_fractal_dimension(curve, default_fit_window(curve));
    if (fit.alpha != 0.0 || fit.std_err != 0.0) ok = false;
    std::printf("[%s] quadratic baseline: one boundary, alpha = 0\n", ok ? "ok" : "FAIL");
    return ok;
}

bool selftest_renormalization() {
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> eps_dist(0.01, 0.25);
    std::uniform_real_distribution<double> lam_dist(0.05, 1.0);
    std::uniform_real_distribution<double> s_dist(0.0, 1.5);
    bool ok = true;
    for (double b : {0.5, 2.0, 10.0}) {
        for (int rep = 0; rep < 5 && ok; ++rep) {
            const double eps = eps_dist(rng);
            const double lam = lam_dist(rng);
            const double s = s_dist(rng);
            for (const LossSpec& spec :
                 {make_additive_cosine(eps, lam), make_multiplicative_cosine(eps, lam)}) {
                GDConfig cfg;
                cfg.steps = 100;
                const std::vector<double> x0 = {1.0};
                const auto sys =
                    renormalize(spec, std::span<const double>(x0), RenormMap::from_factor(b));
                GDConfig cfg2 = cfg;
                cfg2.x0 = sys.x0;
                cfg2.sum_threshold = cfg.sum_threshold / sys.zeta;
                if (run_gd(spec, cfg, s).classification !=
                    run_gd(sys.spec, cfg2, s).classification) {
                    ok = false;
                }
                std::vector<std::vector<double>> traj;
                run_gd(spec, cfg, s, &traj);
                const double w = 2.0 * 3.14159265358979323846 / lam;
                for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
                    const double x = traj[k][0];
                    const double x_next = traj[k + 1][0];
                    if (!std::isfinite(x) || !std::isfinite(x_next)) break;
                    if (std::abs(w * x) > 1e6) break;
                    const std::vector<double> scaled = {x / b};
                    const double tilde =
                        gd_step(sys.spec, std::span<const double>(scaled), s)[0];
                    const double scale =
                        std::max({std::abs(x_next / b), std::abs(x / b), 1e-12});
                    if (std::abs(x_next / b - tilde) / scale >= 1e-9) ok = false;
                }
            }
        }
    }
    std::printf("[%s] renormalization: step commutation and classifications\n",
                ok ? "ok" : "FAIL");
    return ok;
}

bool selftest_gradients() {
    std::mt19937_64 rng(55);
    std::uniform_real_distribution<double> coord(-5.0, 5.0);
    bool ok = true;
    for (const LossSpec& spec :
         {make_additive_cosine(0.2, 0.1), make_multiplicative_cosine(0.2, 0.1),
          make_two_cosine(0.1, 0.3, 0.05, 0.5), make_additive_cosine_nd(0.2, 0.1, 3),
          make_multiplicative_cosine_nd(0.2, 0.1, 3)}) {
        for (int rep = 0; rep < 25; ++rep) {
            std::vector<double> x(static_cast<std::size_t>(spec.dim));
            for (double& v : x) v = coord(rng);
            const auto analytic = loss_gradient(spec, std::span<const double>(x));
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double h = 1e-6;
                std::vector<double> xp = x, xm = x;
                xp[i] += h;
                xm[i] -= h;
                const double fd = (loss_value(spec, std::span<const double>(xp)) -
                                   loss_value(spec, std::span<const double>(xm))) /
                                  (2.0 * h);
                const double denom = std::max({std::abs(analytic[i]), std::abs(fd), 1.0});
                if (std::abs(analytic[i] - fd) / denom >= 1e-6) ok = false;
            }
        }
    }
    std::printf("[%s] gradients: finite-difference agreement\n", ok ? "ok" : "FAIL");
    return ok;
}

int run_selftest() {
    bool ok = true;
    ok &= selftest_gradients();
    ok &= selftest_quadratic_baseline();
    ok &= selftest_renormalization();
    std::printf("%s\n", ok ? "selftest passed" : "selftest FAILED");
    return ok ? kExitOk : 1;
}

// ---- main ----------------------------------------------------------------

int run(int argc, char** argv) {
    CLI::App app{"fracbound: learning-rate trainability scans and box-counting "
                 "fractal dimensions for perturbed quadratic losses"};
    app.set_version_flag("--version", std::string("fracbound ") + kToolVersion);
    app.set_config("--config", "", "Config file ([subcommand] sections, key=value; "
                                   "command-line flags override)");
    app.require_subcommand(1);

    // scan
    auto* scan_cmd = app.add_subcommand("scan", "Classify one loss over a learning-rate grid");
    SpecFlags scan_spec;
    RunFlags scan_run;
    std::string scan_out;
    bool scan_intensity = false;
    add_spec_flags(*scan_cmd, scan_spec);
    add_run_flags(*scan_cmd, scan_run);
    scan_cmd->add_flag("--intensity", scan_intensity,
                       "Record per-point intensities (loss sums)");
    scan_cmd->add_option("-o,--out", scan_out, "Output scan file")->required();

    // boxcount
    auto* box_cmd =
        app.add_subcommand("boxcount", "Count boundary segments per level and fit the slope");
    std::string box_in, box_curve_out;
    int box_levels = 8;
    box_cmd->add_option("-i,--in", box_in, "Input scan file")->required();
    box_cmd->add_option("--curve-out", box_curve_out, "Write the level/count table as CSV");
    box_cmd->add_option("--fit-levels", box_levels, "Top levels used by the fit")
        ->capture_default_str();

    // sweep
    auto* sweep_cmd =
        app.add_subcommand("sweep", "Fractal dimension over an amplitude/wavelength grid");
    std::string sweep_family = "additive_cosine";
    double sweep_eps_min = 0.01, sweep_eps_max = 0.2;
    double sweep_lam_min = 0.01, sweep_lam_max = 1.0;
    int sweep_eps_n = 10, sweep_lam_n = 10;
    RunFlags sweep_run;
    std::string sweep_out;
    sweep_cmd->add_option("--family", sweep_family, "additive_cosine or multiplicative_cosine")
        ->capture_default_str();
    sweep_cmd->add_option("--eps-min", sweep_eps_min)->capture_default_str();
    sweep_cmd->add_option("--eps-max", sweep_eps_max)->capture_default_str();
    sweep_cmd->add_option("--eps-n", sweep_eps_n)->capture_default_str();
    sweep_cmd->add_option("--lam-min", sweep_lam_min)->capture_default_str();
    sweep_cmd->add_option("--lam-max", sweep_lam_max)->capture_default_str();
    sweep_cmd->add_option("--lam-n", sweep_lam_n)->capture_default_str();
    add_run_flags(*sweep_cmd, sweep_run);
    sweep_cmd->add_option("-o,--out", sweep_out, "Output CSV")->required();

    // collapse
    auto* collapse_cmd = app.add_subcommand(
        "collapse", "Reorganize a sweep CSV as fractal dimension versus roughness");
    std::string collapse_in, collapse_out, collapse_family = "additive_cosine";
    collapse_cmd->add_option("-i,--in", collapse_in, "Sweep CSV")->required();
    collapse_cmd->add_option("--family", collapse_family,
                             "Family the sweep was computed for")
        ->capture_default_str();
    collapse_cmd->add_option("-o,--out", collapse_out, "Output CSV")->required();

    // twocos
    auto* twocos_cmd = app.add_subcommand(
        "twocos", "Two-cosine amplitude grid with its convexity boundary");
    double tc_lam1 = 0.3, tc_lam2 = 0.5;
    double tc_e1_min = 0.0, tc_e1_max = 0.01, tc_e2_min = 0.0, tc_e2_max = 0.02;
    int tc_e1_n = 8, tc_e2_n = 8;
    RunFlags tc_run;
    std::string tc_out, tc_boundary_out;
    twocos_cmd->add_option("--lam1", tc_lam1)->capture_default_str();
    twocos_cmd->add_option("--lam2", tc_lam2)->capture_default_str();
    twocos_cmd->add_option("--eps1-min", tc_e1_min)->capture_default_str();
    twocos_cmd->add_option("--eps1-max", tc_e1_max)->capture_default_str();
    twocos_cmd->add_option("--eps1-n", tc_e1_n)->capture_default_str();
    twocos_cmd->add_option("--eps2-min", tc_e2_min)->capture_default_str();
    twocos_cmd->add_option("--eps2-max", tc_e2_max)->capture_default_str();
    twocos_cmd->add_option("--eps2-n", tc_e2_n)->capture_default_str();
    add_run_flags(*twocos_cmd, tc_run);
    twocos_cmd->add_option("-o,--out", tc_out, "Grid CSV")->required();
    twocos_cmd->add_option("--boundary-out", tc_boundary_out, "Boundary curve CSV");

    // dimscan
    auto* dim_cmd =
        app.add_subcommand("dimscan", "Fractal dimension versus parameter dimension");
    std::string dim_family = "additive_cosine_nd";
    std::vector<int> dim_list = {1, 2, 5, 10, 30};
    double dim_eps = 0.2, dim_lam = 0.1, dim_stagger = 0.0;
    RunFlags dim_run;
    std::string dim_out;
    dim_cmd->add_option("--family", dim_family,
                        "additive_cosine_nd or multiplicative_cosine_nd")
        ->capture_default_str();
    dim_cmd->add_option("--dims", dim_list, "Strictly increasing dimension list")
        ->capture_default_str();
    dim_cmd->add_option("--eps", dim_eps)->capture_default_str();
    dim_cmd->add_option("--lam", dim_lam)->capture_default_str();
    dim_cmd->add_option("--stagger", dim_stagger,
                        "Seeded x0 spread around 1; 0 keeps the symmetric all-ones start, "
                        "which makes every coordinate follow the same orbit")
        ->capture_default_str();
    add_run_flags(*dim_cmd, dim_run);
    dim_cmd->add_option("-o,--out", dim_out, "Output CSV")->required();

    // icscan
    auto* ic_cmd =
        app.add_subcommand("icscan", "Fractal dimension spread over initial conditions");
    SpecFlags ic_spec;
    RunFlags ic_run;
    int ic_samples = 20;
    unsigned long long ic_seed = 12345;
    double ic_lo = -5.0, ic_hi = 5.0;
    std::string ic_out;
    add_spec_flags(*ic_cmd, ic_spec);
    ic_cmd->add_option("--samples", ic_samples, "Number of x0 samples")->capture_default_str();
    ic_cmd->add_option("--seed", ic_seed, "Sampling seed")->capture_default_str();
    ic_cmd->add_option("--x0-min", ic_lo)->capture_default_str();
    ic_cmd->add_option("--x0-max", ic_hi)->capture_default_str();
    add_run_flags(*ic_cmd, ic_run);
    ic_cmd->add_option("-o,--out", ic_out, "Output CSV")->required();

    // artifact
    auto* art_cmd = app.add_subcommand(
        "artifact", "Loss-cap artifact scan for the multiplicative family");
    std::vector<double> art_caps = {1e3};
    double art_eps_min = 1e-7, art_eps_max = 0.1;
    int art_eps_n = 7;
    std::vector<double> art_lams = {0.1, 0.3, 0.5, 1.0};
    RunFlags art_run;
    std::string art_out;
    art_cmd->add_option("--fmax", art_caps, "Loss caps, one scan per value")
        ->capture_default_str();
    art_cmd->add_option("--eps-min", art_eps_min)->capture_default_str();
    art_cmd->add_option("--eps-max", art_eps_max)->capture_default_str();
    art_cmd->add_option("--eps-n", art_eps_n, "Log-spaced amplitude count")
        ->capture_default_str();
    art_cmd->add_option("--lam", art_lams, "Wavelength list")->capture_default_str();
    add_run_flags(*art_cmd, art_run);
    art_cmd->add_option("-o,--out", art_out, "Output CSV")->required();

    // render
    auto* render_cmd =
        app.add_subcommand("render", "Render a scan's intensities as a PPM strip");
    std::string render_in, render_out;
    int render_height = 64;
    std::uint64_t render_width = 2048;
    render_cmd->add_option("-i,--in", render_in, "Input scan file (needs intensities)")
        ->required();
    render_cmd->add_option("-o,--out", render_out, "Output PPM")->required();
    render_cmd->add_option("--height", render_height, "Strip height in pixels")
        ->capture_default_str();
    render_cmd->add_option("--width", render_width, "Strip width (0 = one column per point)")
        ->capture_default_str();

    // selftest
    auto* self_cmd = app.add_subcommand(
        "selftest", "Run the built-in gradient, baseline, and renormalization checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
        app.exit(e);
        return kExitUsage;
    }

    if (scan_cmd->parsed()) {
        const LossSpec spec = spec_from_flags(scan_spec);
        const GDConfig cfg = config_from_flags(scan_run, spec.dim);
        const DivergenceScan scan = scan_learning_rates(spec, cfg, scan_run.s_min,
                                                        scan_run.s_max, scan_run.n_max,
                                                        scan_intensity);
        write_scan(scan, scan_out);
        std::uint64_t divergent = 0;
        for (std::uint64_t i = 0; i < scan.point_count(); ++i) divergent += scan.divergent_at(i);
        std::printf("wrote %s: %llu points, %llu divergent\n", scan_out.c_str(),
                    static_cast<unsigned long long>(scan.point_count()),
                    static_cast<unsigned long long>(divergent));
    } else if (box_cmd->parsed()) {
        const DivergenceScan scan = read_scan(box_in);
        const BoxCountCurve curve = boxcount_curve(scan);
        if (!box_curve_out.empty()) emit_csv(curve, box_curve_out);
        print_fit(fit_fractal_dimension(curve, default_fit_window(curve, box_levels)));
    } else if (sweep_cmd->parsed()) {
        const auto family = family_from_name(sweep_family);
        if (!family) throw UsageError("unknown family '" + sweep_family + "'");
        const SweepResult result = amplitude_wavelength_sweep(
            *family, linspace(sweep_eps_min, sweep_eps_max, sweep_eps_n),
            linspace(sweep_lam_min, sweep_lam_max, sweep_lam_n),
            config_from_flags(sweep_run, 1), scan_settings_from_flags(sweep_run));
        emit_csv(result, sweep_out);
        std::printf("wrote %s: %zu cells\n", sweep_out.c_str(), result.cells.size());
    } else if (collapse_cmd->parsed()) {
        const auto family = family_from_name(collapse_family);
        if (!family) throw UsageError("unknown family '" + collapse_family + "'");
        const SweepResult sweep = read_sweep_csv(collapse_in, *family);
        const CollapseSeries series = roughness_collapse(sweep);
        emit_csv(series, collapse_out);
        std::printf("wrote %s: %zu points\n", collapse_out.c_str(), series.points.size());
    } else if (twocos_cmd->parsed()) {
        const TwoCosineSweepResult result = two_cosine_sweep(
            tc_lam1, tc_lam2, linspace(tc_e1_min, tc_e1_max, tc_e1_n),
            linspace(tc_e2_min, tc_e2_max, tc_e2_n), config_from_flags(tc_run, 1),
            scan_settings_from_flags(tc_run));
        emit_csv(result, tc_out);
        if (!tc_boundary_out.empty()) emit_boundary_csv(result, tc_boundary_out);
        std::printf("wrote %s: %zu cells\n", tc_out.c_str(), result.cells.size());
    } else if (dim_cmd->parsed()) {
        const auto family = family_from_name(dim_family);
        if (!family) throw UsageError("unknown family '" + dim_family + "'");
        const DimensionScanResult result =
            dimension_scan(*family, dim_list, dim_eps, dim_lam,
                           config_from_flags(dim_run, 1), scan_settings_from_flags(dim_run),
                           dim_stagger);
        emit_csv(result, dim_out);
        for (std::size_t i = 0; i < result.dims.size(); ++i) {
            std::printf("d=%d alpha=%.6f stderr=%.6f\n", result.dims[i],
                        result.per_dim[i].fit.alpha, result.per_dim[i].fit.std_err);
        }
    } else if (ic_cmd->parsed()) {
        const LossSpec spec = spec_from_flags(ic_spec);
        std::mt19937_64 rng(ic_seed);
        std::uniform_real_distribution<double> x0_dist(ic_lo, ic_hi);
        std::vector<double> samples(static_cast<std::size_t>(ic_samples));
        for (double& v : samples) v = x0_dist(rng);
        const InitialConditionScanResult result = initial_condition_scan(
            spec, samples, config_from_flags(ic_run, spec.dim),
            scan_settings_from_flags(ic_run));
        emit_csv(result, ic_out);
        std::printf("mean alpha=%.6f std=%.6f over %d samples\n", result.mean_alpha,
                    result.std_alpha, ic_samples);
    } else if (art_cmd->parsed()) {
        const auto results = fmax_artifact_scan(
            art_caps, logspace(art_eps_min, art_eps_max, art_eps_n), art_lams,
            config_from_flags(art_run, 1), scan_settings_from_flags(art_run));
        emit_csv(results, art_out);
        std::printf("wrote %s: %zu caps\n", art_out.c_str(), results.size());
    } else if (render_cmd->parsed()) {
        render_intensity_strip(read_scan(render_in), render_out, render_height, render_width);
        std::printf("wrote %s\n", render_out.c_str());
    } else if (self_cmd->parsed()) {
        return run_selftest();
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const fracbound::UsageError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return kExitUsage;
    } catch (const fracbound::IntegrityError& e) {
        std::fprintf(stderr, "integrity error: %s\n", e.what());
        return kExitIntegrity;
    } catch (const fracbound::ResourceError& e) {
        std::fprintf(stderr, "resource error: %s\n", e.what());
        return kExitResource;
    } catch (const std::bad_alloc&) {
        std::fprintf(stderr, "resource error: out of memory\n");
        return kExitResource;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
