#include "fracbound/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "fracbound/errors.hpp"

namespace fracbound {

namespace {

void check_scan_settings(const ScanSettings& scan) {
    if (!(scan.s_min < scan.s_max)) throw UsageError("ScanSettings: need s_min < s_max");
    if (scan.n_max < 1 || scan.n_max > kMaxScanExponent) {
        throw UsageError("ScanSettings: n_max out of range");
    }
    if (scan.fit_levels < 1) throw UsageError("ScanSettings: fit_levels must be >= 1");
}

// One cell: scan, box-count, fit. Failures are isolated to the cell.
SweepCell run_cell(const LossSpec& spec, const GDConfig& cfg, const ScanSettings& scan) {
    SweepCell cell;
    try {
        const DivergenceScan ds =
            scan_learning_rates(spec, cfg, scan.s_min, scan.s_max, scan.n_max, false);
        cell.fit = fit_scan(ds, scan.fit_levels);
        cell.valid = true;
    } catch (const UsageError&) {
        throw;  // misconfiguration is not a per-cell failure
    } catch (...) {
        cell.valid = false;
    }
    return cell;
}

}  // namespace

std::vector<double> linspace(double lo, double hi, int count) {
    if (count < 1) throw UsageError("linspace: count must be >= 1");
    if (count == 1) return {lo};
    std::vector<double> values(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        values[i] = lo + static_cast<double>(i) * (hi - lo) / static_cast<double>(count - 1);
    }
    return values;
}

std::vector<double> logspace(double lo, double hi, int count) {
    if (!(lo > 0.0 && hi > 0.0)) throw UsageError("logspace: endpoints must be > 0");
    std::vector<double> values = linspace(std::log10(lo), std::log10(hi), count);
    for (double& v : values) v = std::pow(10.0, v);
    return values;
}

SweepResult amplitude_wavelength_sweep(LossFamily family, const std::vector<double>& eps_values,
                                       const std::vector<double>& lambda_values,
                                       const GDConfig& cfg, const ScanSettings& scan) {
    if (family != LossFamily::AdditiveCosine && family != LossFamily::MultiplicativeCosine) {
        throw UsageError("amplitude_wavelength_sweep: scalar single-cosine families only");
    }
    if (eps_values.empty() || lambda_values.empty()) {
        throw UsageError("amplitude_wavelength_sweep: empty parameter axis");
    }
    check_scan_settings(scan);

    SweepResult result;
    result.family = family;
    result.eps_values = eps_values;
    result.lambda_values = lambda_values;
    result.config = cfg;
    result.scan = scan;
    result.cells.reserve(eps_values.size() * lambda_values.size());
    for (double eps : eps_values) {
        for (double lam : lambda_values) {
            const LossSpec spec = family == LossFamily::AdditiveCosine
                                      ? make_additive_cosine(eps, lam)
                                      : make_multiplicative_cosine(eps, lam);
            SweepCell cell = run_cell(spec, cfg, scan);
            cell.theta = roughness(spec).theta;
            result.cells.push_back(cell);
        }
    }
    return result;
}

CollapseSeries roughness_collapse(const SweepResult& sweep) {
    if (sweep.family != LossFamily::AdditiveCosine &&
        sweep.family != LossFamily::MultiplicativeCosine) {
        throw UsageError("roughness_collapse: no single roughness invariant for this family");
    }
    CollapseSeries series;
    series.points.reserve(sweep.cells.size());
    for (const SweepCell& cell : sweep.cells) {
        if (!cell.valid) continue;
        series.points.push_back({cell.theta, cell.fit.alpha, cell.fit.std_err});
    }
    std::stable_sort(series.points.begin(), series.points.end(),
                     [](const CollapsePoint& a, const CollapsePoint& b) {
                         return a.theta < b.theta;
                     });
    if (sweep.family == LossFamily::AdditiveCosine) {
        series.critical_theta = critical_additive_roughness();
    }
    return series;
}

TwoCosineSweepResult two_cosine_sweep(double lambda1, double lambda2,
                                      const std::vector<double>& eps1_values,
                                      const std::vector<double>& eps2_values,
                                      const GDConfig& cfg, const ScanSettings& scan) {
    if (eps1_values.empty() || eps2_values.empty()) {
        throw UsageError("two_cosine_sweep: empty amplitude axis");
    }
    check_scan_settings(scan);

    TwoCosineSweepResult result;
    result.lambda1 = lambda1;
    result.lambda2 = lambda2;
    result.eps1_values = eps1_values;
    result.eps2_values = eps2_values;
    result.config = cfg;
    result.scan = scan;
    result.cells.reserve(eps1_values.size() * eps2_values.size());
    for (double e1 : eps1_values) {
        for (double e2 : eps2_values) {
            const LossSpec spec = make_two_cosine(e1, lambda1, e2, lambda2);
            result.cells.push_back(run_cell(spec, cfg, scan));
        }
    }
    result.boundary_eps2.reserve(eps1_values.size());
    for (double e1 : eps1_values) {
        result.boundary_eps2.push_back(two_cosine_convexity_boundary(lambda1, lambda2, e1));
    }
    return result;
}

std::vector<double> dimension_scan_x0(int dim, double stagger) {
    if (dim < 1) throw UsageError("dimension_scan_x0: dim must be >= 1");
    if (!(stagger >= 0.0)) throw UsageError("dimension_scan_x0: stagger must be >= 0");
    std::vector<double> x0(static_cast<std::size_t>(dim), 1.0);
    if (stagger > 0.0) {
        std::mt19937_64 rng(0x5eedULL + static_cast<unsigned long long>(dim));
        std::uniform_real_distribution<double> u(1.0 - stagger, 1.0 + stagger);
        for (double& v : x0) v = u(rng);
    }
    return x0;
}

DimensionScanResult dimension_scan(LossFamily nd_family, const std::vector<int>& dims,
                                   double epsilon, double lambda, const GDConfig& cfg,
                                   const ScanSettings& scan, double stagger) {
    if (nd_family != LossFamily::AdditiveCosineND &&
        nd_family != LossFamily::MultiplicativeCosineND) {
        throw UsageError("dimension_scan: ND families only");
    }
    if (dims.empty()) throw UsageError("dimension_scan: empty dimension list");
    for (std::size_t i = 1; i < dims.size(); ++i) {
        if (dims[i] <= dims[i - 1]) {
            throw UsageError("dimension_scan: dims must be strictly increasing");
        }
    }
    if (!cfg.x0.empty()) {
        throw UsageError("dimension_scan: x0 must be defaulted (length varies with d)");
    }
    check_scan_settings(scan);

    DimensionScanResult result;
    result.family = nd_family;
    result.epsilon = epsilon;
    result.lambda = lambda;
    result.stagger = stagger;
    result.dims = dims;
    result.config = cfg;
    result.scan = scan;
    result.per_dim.reserve(dims.size());
    for (int d : dims) {
        const LossSpec spec = nd_family == LossFamily::AdditiveCosineND
                                  ? make_additive_cosine_nd(epsilon, lambda, d)
                                  : make_multiplicative_cosine_nd(epsilon, lambda, d);
        GDConfig cell_cfg = cfg;
        cell_cfg.x0 = dimension_scan_x0(d, stagger);
        result.per_dim.push_back(run_cell(spec, cell_cfg, scan));
    }
    return result;
}

InitialConditionScanResult initial_condition_scan(const LossSpec& spec,
                                                  const std::vector<double>& x0_values,
                                                  const GDConfig& cfg,
                                                  const ScanSettings& scan) {
    validate(spec);
    if (spec.dim != 1) throw UsageError("initial_condition_scan: 1-d specs only");
    if (x0_values.size() < 2) throw UsageError("initial_condition_scan: need >= 2 samples");
    check_scan_settings(scan);

    InitialConditionScanResult result;
    result.x0_values = x0_values;
    result.config = cfg;
    result.scan = scan;
    result.per_sample.reserve(x0_values.size());
    for (double x0 : x0_values) {
        GDConfig sample_cfg = cfg;
        sample_cfg.x0 = {x0};
        result.per_sample.push_back(run_cell(spec, sample_cfg, scan));
    }

    double mean = 0.0;
    int valid = 0;
    for (const SweepCell& cell : result.per_sample) {
        if (!cell.valid) continue;
        mean += cell.fit.alpha;
        ++valid;
    }
    if (valid > 0) mean /= valid;
    double var = 0.0;
    for (const SweepCell& cell : result.per_sample) {
        if (!cell.valid) continue;
        var += (cell.fit.alpha - mean) * (cell.fit.alpha - mean);
    }
    result.mean_alpha = mean;
    result.std_alpha = valid > 1 ? std::sqrt(var / (valid - 1)) : 0.0;
    return result;
}

std::vector<ArtifactScanResult> fmax_artifact_scan(const std::vector<double>& f_max_values,
                                                   const std::vector<double>& eps_values,
                                                   const std::vector<double>& lambda_values,
                                                   const GDConfig& cfg,
                                                   const ScanSettings& scan) {
    if (f_max_values.empty()) throw UsageError("fmax_artifact_scan: empty cap list");
    if (eps_values.empty() || lambda_values.empty()) {
        throw UsageError("fmax_artifact_scan: empty parameter axis");
    }
    check_scan_settings(scan);

    std::vector<ArtifactScanResult> results;
    results.reserve(f_max_values.size());
    for (double f_max : f_max_values) {
        ArtifactScanResult res;
        res.f_max = f_max;
        res.eps_values = eps_values;
        res.lambda_values = lambda_values;
        res.config = cfg;
        res.config.mode = ClassifyMode::LossCap;
        res.config.loss_cap = f_max;
        res.scan = scan;
        res.cells.reserve(eps_values.size() * lambda_values.size());
        for (double eps : eps_values) {
            for (double lam : lambda_values) {
                res.cells.push_back(
                    run_cell(make_multiplicative_cosine(eps, lam), res.config, scan));
            }
        }
        res.boundary_eps.reserve(lambda_values.size());
        for (double lam : lambda_values) {
            res.boundary_eps.push_back(fmax_convexity_boundary(lam, f_max));
        }
        results.push_back(std::move(res));
    }
    return results;
}

}  // namespace fracbound
