#include "fracbound/csv.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "fracbound/errors.hpp"

namespace fracbound {

namespace {

constexpr double nan_value = std::numeric_limits<double>::quiet_NaN();

void atomic_write_text(const std::filesystem::path& path, const std::string& text) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ResourceError("cannot open " + tmp.string() + " for writing");
        out << text;
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

double cell_alpha(const SweepCell& cell) { return cell.valid ? cell.fit.alpha : nan_value; }
double cell_err(const SweepCell& cell) { return cell.valid ? cell.fit.std_err : nan_value; }

}  // namespace

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

double parse_double(const std::string& text) {
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end == text.c_str() || *end != '\0') {
        throw IntegrityError("bad numeric field '" + text + "'");
    }
    return v;
}

void emit_csv(const BoxCountCurve& curve, const std::filesystem::path& path) {
    std::ostringstream out;
    out << "n,N,count\n";
    for (const BoxCountEntry& e : curve.entries) {
        out << e.n << "," << e.segments << "," << e.count << "\n";
    }
    atomic_write_text(path, out.str());
}

void emit_csv(const SweepResult& sweep, const std::filesystem::path& path) {
    std::ostringstream out;
    out << "eps,lambda,theta,alpha,stderr\n";
    for (std::size_t i = 0; i < sweep.eps_values.size(); ++i) {
        for (std::size_t j = 0; j < sweep.lambda_values.size(); ++j) {
            const SweepCell& cell = sweep.cell(i, j);
            out << format_double(sweep.eps_values[i]) << ","
                << format_double(sweep.lambda_values[j]) << "," << format_double(cell.theta)
                << "," << format_double(cell_alpha(cell)) << "," << format_double(cell_err(cell))
                << "\n";
        }
    }
    atomic_write_text(path, out.str());
}

void emit_csv(const CollapseSeries& series, const std::filesystem::path& path) {
    std::ostringstream out;
    out << (series.critical_theta ? "theta,alpha,stderr,critical_theta\n"
                                  : "theta,alpha,stderr\n");
    for (const CollapsePoint& p : series.points) {
        out << format_double(p.theta) << "," << format_double(p.alpha) << ","
            << format_double(p.std_err);
        if (series.critical_theta) out << "," << format_double(*series.critical_theta);
        out << "\n";
    }
    atomic_write_text(path, out.str());
}

void emit_csv(const DimensionScanResult& result, const std::filesystem::path& path) {
    std::ostringstream out;
    out << "d,alpha,stderr\n";
    for (std::size_t i = 0; i < result.dims.size(); ++i) {
        out << result.dims[i] << "," << format_double(cell_alpha(result.per_dim[i])) << ","
            << format_double(cell_err(result.per_dim[i])) << "\n";
    }
    atomic_write_text(path, out.str());
}

void emit_csv(const InitialConditionScanResult& result, const std::filesystem::path& path) {
    std::ostringstream out;
    out << "x0,alpha,stderr\n";
    for (std::size_t i = 0; i < result.x0_values.size(); ++i) {
        out << format_double(result.x0_values[i]) << ","
            << format_double(cell_alpha(result.per_sample[i])) << ","
            << format_double(cell_err(result.per_sample[i])) << "\n";
    }
    atomic_write_text(path, out.str());
}

void emit_csv(const std::vector<ArtifactScanResult>& results,
              const std::filesystem::path& path) {
    std::ostringstream out;
    out << "fmax,eps,lambda,alpha,stderr,eps_boundary\n";
    for (const ArtifactScanResult& res : results) {
        for (std::size_t i = 0; i < res.eps_values.size(); ++i) {
            for (std::size_t j = 0; j < res.lambda_values.size(); ++j) {
                const SweepCell& cell = res.cell(i, j);
                out << format_double(res.f_max) << "," << format_double(res.eps_values[i])
                    << "," << format_double(res.lambda_values[j]) << ","
                    << format_double(cell_alpha(cell)) << "," << format_double(cell_err(cell))
                    << "," << format_double(res.boundary_eps[j]) << "\n";
            }
        }
    }
    atomic_write_text(path, out.str());
}

void emit_csv(const TwoCosineSweepResult& result, const std::filesystem::path& path) {
    std::ostringstream out;
    out << "eps1,eps2,alpha,stderr\n";
    for (std::size_t i = 0; i < result.eps1_values.size(); ++i) {
        for (std::size_t j = 0; j < result.eps2_values.size(); ++j) {
            const SweepCell& cell = result.cell(i, j);
            out << format_double(result.eps1_values[i]) << ","
                << format_double(result.eps2_values[j]) << "," << format_double(cell_alpha(cell))
                << "," << format_double(cell_err(cell)) << "\n";
        }
    }
    atomic_write_text(path, out.str());
}

void emit_boundary_csv(const TwoCosineSweepResult& result, const std::filesystem::path& path) {
    std::ostringstream out;
    out << "eps1,eps2_boundary\n";
    for (std::size_t i = 0; i < result.eps1_values.size(); ++i) {
        const auto& boundary = result.boundary_eps2[i];
        out << format_double(result.eps1_values[i]) << ","
            << format_double(boundary ? *boundary : nan_value) << "\n";
    }
    atomic_write_text(path, out.str());
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::istringstream in(line);
    std::string field;
    while (std::getline(in, field, ',')) fields.push_back(field);
    return fields;
}

}  // namespace

SweepResult read_sweep_csv(const std::filesystem::path& path, LossFamily family) {
    std::ifstream in(path);
    if (!in) throw ResourceError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != "eps,lambda,theta,alpha,stderr") {
        throw IntegrityError(path.string() + ": not a sweep CSV");
    }

    SweepResult sweep;
    sweep.family = family;
    std::vector<double> eps_col, lam_col;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 5) {
            throw IntegrityError(path.string() + ": malformed sweep row '" + line + "'");
        }
        eps_col.push_back(parse_double(fields[0]));
        lam_col.push_back(parse_double(fields[1]));
        SweepCell cell;
        cell.theta = parse_double(fields[2]);
        cell.fit.alpha = parse_double(fields[3]);
        cell.fit.std_err = parse_double(fields[4]);
        cell.valid = !std::isnan(cell.fit.alpha);
        sweep.cells.push_back(cell);
    }
    if (sweep.cells.empty()) throw IntegrityError(path.string() + ": empty sweep CSV");

    // Rows are written lambda-fastest; recover both axes from the layout.
    std::size_t lambda_count = 1;
    while (lambda_count < eps_col.size() && eps_col[lambda_count] == eps_col[0]) {
        ++lambda_count;
    }
    if (sweep.cells.size() % lambda_count != 0) {
        throw IntegrityError(path.string() + ": ragged sweep grid");
    }
    for (std::size_t j = 0; j < lambda_count; ++j) sweep.lambda_values.push_back(lam_col[j]);
    for (std::size_t i = 0; i < sweep.cells.size(); i += lambda_count) {
        sweep.eps_values.push_back(eps_col[i]);
    }
    return sweep;
}

}  // namespace fracbound
