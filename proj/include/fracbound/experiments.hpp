#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fracbound/engine.hpp"
#include "fracbound/fractal.hpp"
#include "fracbound/landscape.hpp"

namespace fracbound {

// Scan geometry shared by all sweeps.
struct ScanSettings {
    double s_min = 0.0;
    double s_max = 1.5;
    int n_max = 20;
    int fit_levels = 8;
};

struct SweepCell {
    bool valid = false;  // false when the cell's scan failed
    FractalFit fit;
    double theta = 0.0;
};

// Fractal dimension over an (eps, lambda) grid for one scalar family,
// row-major with eps as the slow axis.
struct SweepResult {
    LossFamily family = LossFamily::AdditiveCosine;
    std::vector<double> eps_values;
    std::vector<double> lambda_values;
    std::vector<SweepCell> cells;
    GDConfig config;
    ScanSettings scan;

    const SweepCell& cell(std::size_t i_eps, std::size_t j_lambda) const {
        return cells[i_eps * lambda_values.size() + j_lambda];
    }
};

SweepResult amplitude_wavelength_sweep(LossFamily family, const std::vector<double>& eps_values,
                                       const std::vector<double>& lambda_values,
                                       const GDConfig& cfg, const ScanSettings& scan);

// Evenly spaced values from lo to hi inclusive.
std::vector<double> linspace(double lo, double hi, int count);
// Log-spaced values from lo to hi inclusive (lo, hi > 0).
std::vector<double> logspace(double lo, double hi, int count);

struct CollapsePoint {
    double theta = 0.0;
    double alpha = 0.0;
    double std_err = 0.0;
};

// Sweep cells flattened to (theta, alpha) and sorted by theta ascending.
// critical_theta carries 1/(2*pi^2) for the additive family only.
struct CollapseSeries {
    std::vector<CollapsePoint> points;
    std::optional<double> critical_theta;
};

CollapseSeries roughness_collapse(const SweepResult& sweep);

// Fractal dimension over an (eps1, eps2) grid for the two-cosine loss, plus
// the convexity boundary eps2(eps1) sampled along eps1_values.
struct TwoCosineSweepResult {
    double lambda1 = 0.3;
    double lambda2 = 0.5;
    std::vector<double> eps1_values;
    std::vector<double> eps2_values;
    std::vector<SweepCell> cells;  // theta unused; row-major, eps1 slow
    std::vector<std::optional<double>> boundary_eps2;
    GDConfig config;
    ScanSettings scan;

    const SweepCell& cell(std::size_t i, std::size_t j) const {
        return cells[i * eps2_values.size() + j];
    }
};

TwoCosineSweepResult two_cosine_sweep(double lambda1, double lambda2,
                                      const std::vector<double>& eps1_values,
                                      const std::vector<double>& eps2_values,
                                      const GDConfig& cfg, const ScanSettings& scan);

struct DimensionScanResult {
    LossFamily family = LossFamily::AdditiveCosineND;
    double epsilon = 0.2;
    double lambda = 0.1;
    double stagger = 0.0;
    std::vector<int> dims;
    std::vector<SweepCell> per_dim;
    GDConfig config;
    ScanSettings scan;
};

// Initial point for one dimension-scan cell: all ones when stagger == 0,
// otherwise a seeded uniform draw from [1 - stagger, 1 + stagger] per
// coordinate. A symmetric start collapses the ND dynamics onto a single
// coordinate (every component follows the same orbit), so measuring a true
// dimension dependence requires stagger > 0.
std::vector<double> dimension_scan_x0(int dim, double stagger);

// Fractal dimension versus parameter dimension for an ND family at fixed
// (eps, lambda). cfg.x0 must be empty; each cell starts from
// dimension_scan_x0(d, stagger).
DimensionScanResult dimension_scan(LossFamily nd_family, const std::vector<int>& dims,
                                   double epsilon, double lambda, const GDConfig& cfg,
                                   const ScanSettings& scan, double stagger = 0.0);

struct InitialConditionScanResult {
    std::vector<double> x0_values;
    std::vector<SweepCell> per_sample;
    double mean_alpha = 0.0;
    double std_alpha = 0.0;  // sample standard deviation
    GDConfig config;
    ScanSettings scan;
};

InitialConditionScanResult initial_condition_scan(const LossSpec& spec,
                                                  const std::vector<double>& x0_values,
                                                  const GDConfig& cfg,
                                                  const ScanSettings& scan);

// Multiplicative-family artifact scan: fractal dimension over (eps, lambda)
// under LossCap classification at cap f_max, with the convexity boundary
// eps(lambda) for that cap.
struct ArtifactScanResult {
    double f_max = 1e3;
    std::vector<double> eps_values;
    std::vector<double> lambda_values;
    std::vector<SweepCell> cells;  // row-major, eps slow
    std::vector<double> boundary_eps;  // one per lambda
    GDConfig config;
    ScanSettings scan;

    const SweepCell& cell(std::size_t i_eps, std::size_t j_lambda) const {
        return cells[i_eps * lambda_values.size() + j_lambda];
    }
};

std::vector<ArtifactScanResult> fmax_artifact_scan(const std::vector<double>& f_max_values,
                                                   const std::vector<double>& eps_values,
                                                   const std::vector<double>& lambda_values,
                                                   const GDConfig& cfg,
                                                   const ScanSettings& scan);

}  // namespace fracbound
