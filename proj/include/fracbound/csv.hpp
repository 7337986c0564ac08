#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fracbound/experiments.hpp"
#include "fracbound/fractal.hpp"

namespace fracbound {

// All emitters write a header row plus one data row per entry, numbers at 17
// significant digits (lossless for binary64), deterministic row order,
// write-temp-then-rename. Cells whose scan failed serialize alpha and stderr
// as nan.

// columns: n,N,count
void emit_csv(const BoxCountCurve& curve, const std::filesystem::path& path);
// columns: eps,lambda,theta,alpha,stderr
void emit_csv(const SweepResult& sweep, const std::filesystem::path& path);
// columns: theta,alpha,stderr[,critical_theta]
void emit_csv(const CollapseSeries& series, const std::filesystem::path& path);
// columns: d,alpha,stderr
void emit_csv(const DimensionScanResult& result, const std::filesystem::path& path);
// columns: x0,alpha,stderr
void emit_csv(const InitialConditionScanResult& result, const std::filesystem::path& path);
// columns: fmax,eps,lambda,alpha,stderr,eps_boundary (one table per cap,
// concatenated)
void emit_csv(const std::vector<ArtifactScanResult>& results,
              const std::filesystem::path& path);
// grid columns: eps1,eps2,alpha,stderr
void emit_csv(const TwoCosineSweepResult& result, const std::filesystem::path& path);
// boundary columns: eps1,eps2_boundary (nan when no solution exists)
void emit_boundary_csv(const TwoCosineSweepResult& result, const std::filesystem::path& path);

// Rebuilds a sweep from its CSV so downstream stages can run without
// repeating the scans. Axes are recovered from the row order.
SweepResult read_sweep_csv(const std::filesystem::path& path, LossFamily family);

// 17-significant-digit decimal text; round-trips binary64 exactly.
std::string format_double(double value);
double parse_double(const std::string& text);

}  // namespace fracbound
