#pragma once

#include <cstdint>
#include <vector>

#include "fracbound/engine.hpp"

namespace fracbound {

struct BoxCountEntry {
    int n = 0;                   // coarse-grain level
    std::uint64_t segments = 0;  // N = 2^n
    std::uint64_t count = 0;     // |B_N|, boundary segments at this level
};

struct BoxCountCurve {
    std::vector<BoxCountEntry> entries;  // sorted by n, one entry per level
};

// Boundary segments at level n: select grid indices i*2^(n_max-n) for
// i = 0..2^n and count adjacent pairs whose classifications differ.
std::uint64_t boundary_segment_count(const DivergenceScan& scan, int n);

// boundary_segment_count for every level 0..n_max.
BoxCountCurve boxcount_curve(const DivergenceScan& scan);

struct FitWindow {
    int n_lo = 0;
    int n_hi = 0;
};

// The `levels` largest levels of the curve (default 8), where the scaling
// regime lives.
FitWindow default_fit_window(const BoxCountCurve& curve, int levels = 8);

struct FractalFit {
    double alpha = 0.0;
    double std_err = 0.0;
    FitWindow window;
    int points_used = 0;
};

// Ordinary least squares of log2(count) on log2(N) over the window, dropping
// zero counts. Degenerate convention: fewer than 3 usable points, or every
// usable count <= 1, yields alpha = 0 with std_err = 0.
FractalFit fit_fractal_dimension(const BoxCountCurve& curve, FitWindow window);

// Convenience: curve + fit over the default window.
FractalFit fit_scan(const DivergenceScan& scan, int levels = 8);

}  // namespace fracbound
