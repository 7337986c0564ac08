#include "fracbound/render.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "fracbound/errors.hpp"

namespace fracbound {

namespace {

void atomic_write_bytes(const std::filesystem::path& path, const std::string& bytes) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ResourceError("cannot open " + tmp.string() + " for writing");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) throw ResourceError("short write to " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw ResourceError("cannot rename into " + path.string());
    }
}

// log10 range of the finite positive intensities of one class.
struct ClassRange {
    double lo = 0.0;
    double hi = 0.0;
    bool usable = false;
};

ClassRange class_range(const std::vector<double>& values) {
    ClassRange range;
    range.lo = std::numeric_limits<double>::infinity();
    range.hi = -std::numeric_limits<double>::infinity();
    for (double v : values) {
        if (!(std::isfinite(v) && v > 0.0)) continue;
        const double l = std::log10(v);
        range.lo = std::min(range.lo, l);
        range.hi = std::max(range.hi, l);
        range.usable = true;
    }
    return range;
}

unsigned char channel_value(double intensity, const ClassRange& range) {
    if (!range.usable || range.hi - range.lo < 1e-300) return 255;
    double l;
    if (std::isnan(intensity) || intensity <= 0.0) {
        l = range.lo;
    } else {
        l = std::log10(intensity);
        l = std::clamp(l, range.lo, range.hi);
    }
    const double t = (l - range.lo) / (range.hi - range.lo);
    return static_cast<unsigned char>(std::lround(64.0 + t * (255.0 - 64.0)));
}

}  // namespace

void render_intensity_strip(const DivergenceScan& scan, const std::filesystem::path& path,
                            int height, std::uint64_t width) {
    if (scan.intensities.empty()) {
        throw UsageError("render_intensity_strip: scan has no intensities");
    }
    if (height < 1) throw UsageError("render_intensity_strip: height must be >= 1");

    const std::uint64_t points = scan.point_count();
    const std::uint64_t w = width == 0 ? points : std::min(width, points);

    // Column -> grid index, evenly spread over the grid.
    std::vector<std::uint64_t> column_index(w);
    for (std::uint64_t j = 0; j < w; ++j) {
        column_index[j] =
            w == 1 ? 0
                   : static_cast<std::uint64_t>(std::llround(
                         static_cast<double>(j) * static_cast<double>(points - 1) /
                         static_cast<double>(w - 1)));
    }

    std::vector<double> bounded_vals, divergent_vals;
    for (std::uint64_t j = 0; j < w; ++j) {
        const std::uint64_t i = column_index[j];
        (scan.divergent_at(i) ? divergent_vals : bounded_vals).push_back(scan.intensities[i]);
    }
    const ClassRange bounded_range = class_range(bounded_vals);
    const ClassRange divergent_range = class_range(divergent_vals);

    std::string row;
    row.reserve(w * 3);
    for (std::uint64_t j = 0; j < w; ++j) {
        const std::uint64_t i = column_index[j];
        const double intensity = scan.intensities[i];
        if (scan.divergent_at(i)) {
            row.push_back(static_cast<char>(channel_value(intensity, divergent_range)));
            row.push_back(0);
            row.push_back(0);
        } else {
            row.push_back(0);
            row.push_back(0);
            row.push_back(static_cast<char>(channel_value(intensity, bounded_range)));
        }
    }

    std::string bytes = "P6\n" + std::to_string(w) + " " + std::to_string(height) + "\n255\n";
    bytes.reserve(bytes.size() + row.size() * static_cast<std::size_t>(height));
    for (int r = 0; r < height; ++r) bytes += row;
    atomic_write_bytes(path, bytes);
}

}  // namespace fracbound
