#include "fracbound/scanfile.hpp"

#include <cstring>
#include <ctime>
#include <fstream>
#include <map>
#include <sstream>

#include "fracbound/csv.hpp"
#include "fracbound/errors.hpp"
#include "fracbound/version.hpp"

namespace fracbound {

namespace {

constexpr char kMagic[4] = {'F', 'T', 'B', 'S'};

std::string current_utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

void append_u32_le(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void append_u64_le(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void append_f64_le(std::string& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    append_u64_le(out, bits);
}

std::uint64_t read_u64_le(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
}

std::uint32_t read_u32_le(const unsigned char* p) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    return v;
}

double read_f64_le(const unsigned char* p) {
    const std::uint64_t bits = read_u64_le(p);
    double v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
}

void atomic_write(const std::filesystem::path& path, const std::string& bytes) {
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

}  // namespace

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t seed) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    std::uint64_t hash = seed;
    for (std::size_t i = 0; i < size; ++i) {
        hash ^= bytes[i];
        hash *= 0x100000001b3ull;
    }
    return hash;
}

std::string manifest_text(const DivergenceScan& scan) {
    std::ostringstream out;
    out << "schema_version=" << static_cast<int>(kScanSchemaVersion) << "\n";
    out << "tool_version=" << kToolVersion << "\n";
    out << "created_utc=" << current_utc_timestamp() << "\n";
    out << "family=" << family_name(scan.spec.family) << "\n";
    out << "epsilon=" << format_double(scan.spec.epsilon) << "\n";
    out << "lambda=" << format_double(scan.spec.lambda) << "\n";
    out << "epsilon2=" << format_double(scan.spec.epsilon2) << "\n";
    out << "lambda2=" << format_double(scan.spec.lambda2) << "\n";
    out << "dim=" << scan.spec.dim << "\n";
    out << "x0=";
    const std::vector<double> x0 =
        scan.config.x0.empty() ? initial_point(scan.spec, scan.config) : scan.config.x0;
    for (std::size_t i = 0; i < x0.size(); ++i) {
        if (i) out << ",";
        out << format_double(x0[i]);
    }
    out << "\n";
    out << "steps=" << scan.config.steps << "\n";
    out << "classify_mode="
        << (scan.config.mode == ClassifyMode::SumThreshold ? "sum_threshold" : "loss_cap")
        << "\n";
    out << "sum_threshold=" << format_double(scan.config.sum_threshold) << "\n";
    out << "loss_cap=" << format_double(scan.config.loss_cap) << "\n";
    out << "s_min=" << format_double(scan.s_min) << "\n";
    out << "s_max=" << format_double(scan.s_max) << "\n";
    out << "n_max=" << scan.n_max << "\n";
    out << "with_intensity=" << (scan.intensities.empty() ? 0 : 1) << "\n";
    return out.str();
}

void write_scan(const DivergenceScan& scan, const std::filesystem::path& path) {
    if (scan.bits.size() != packed_bit_bytes(scan.n_max)) {
        throw UsageError("write_scan: bit payload does not match n_max");
    }
    if (!scan.intensities.empty() && scan.intensities.size() != scan.point_count()) {
        throw UsageError("write_scan: intensity payload does not match n_max");
    }

    const std::string manifest = manifest_text(scan);
    std::string bytes;
    bytes.reserve(16 + manifest.size() + scan.bits.size() + scan.intensities.size() * 8);
    bytes.append(kMagic, sizeof(kMagic));
    bytes.push_back(static_cast<char>(kScanSchemaVersion));
    append_u32_le(bytes, static_cast<std::uint32_t>(manifest.size()));
    bytes.append(manifest);
    bytes.append(reinterpret_cast<const char*>(scan.bits.data()), scan.bits.size());
    for (double v : scan.intensities) append_f64_le(bytes, v);
    append_u64_le(bytes, fnv1a64(bytes.data(), bytes.size()));

    atomic_write(path, bytes);
}

namespace {

std::map<std::string, std::string> parse_manifest(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw IntegrityError("scan manifest: malformed line '" + line + "'");
        }
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

const std::string& need(const std::map<std::string, std::string>& kv, const std::string& key) {
    const auto it = kv.find(key);
    if (it == kv.end()) throw IntegrityError("scan manifest: missing key '" + key + "'");
    return it->second;
}

long parse_long(const std::string& text) {
    char* end = nullptr;
    const long v = std::strtol(text.c_str(), &end, 10);
    if (end == text.c_str() || *end != '\0') {
        throw IntegrityError("scan manifest: bad integer '" + text + "'");
    }
    return v;
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> values;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) values.push_back(parse_double(item));
    return values;
}

}  // namespace

DivergenceScan read_scan(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ResourceError("cannot open " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();

    const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());
    if (bytes.size() < 17 || std::memcmp(data, kMagic, sizeof(kMagic)) != 0) {
        throw IntegrityError(path.string() + ": not a scan file");
    }
    if (data[4] != kScanSchemaVersion) {
        throw VersionError(path.string() + ": unsupported schema version " +
                           std::to_string(static_cast<int>(data[4])));
    }

    const std::uint64_t checksum_stored = read_u64_le(data + bytes.size() - 8);
    const std::uint64_t checksum_actual = fnv1a64(bytes.data(), bytes.size() - 8);
    if (checksum_stored != checksum_actual) {
        throw IntegrityError(path.string() + ": checksum mismatch");
    }

    const std::uint32_t manifest_len = read_u32_le(data + 5);
    std::size_t offset = 9;
    if (bytes.size() < offset + manifest_len) {
        throw IntegrityError(path.string() + ": truncated manifest");
    }
    const auto kv = parse_manifest(bytes.substr(offset, manifest_len));
    offset += manifest_len;

    if (parse_long(need(kv, "schema_version")) != kScanSchemaVersion) {
        throw VersionError(path.string() + ": unsupported manifest schema_version");
    }

    DivergenceScan scan;
    const auto family = family_from_name(need(kv, "family"));
    if (!family) throw IntegrityError(path.string() + ": unknown family in manifest");
    scan.spec.family = *family;
    scan.spec.epsilon = parse_double(need(kv, "epsilon"));
    scan.spec.lambda = parse_double(need(kv, "lambda"));
    scan.spec.epsilon2 = parse_double(need(kv, "epsilon2"));
    scan.spec.lambda2 = parse_double(need(kv, "lambda2"));
    scan.spec.dim = static_cast<int>(parse_long(need(kv, "dim")));
    scan.config.x0 = parse_double_list(need(kv, "x0"));
    scan.config.steps = static_cast<int>(parse_long(need(kv, "steps")));
    const std::string& mode = need(kv, "classify_mode");
    if (mode == "sum_threshold") {
        scan.config.mode = ClassifyMode::SumThreshold;
    } else if (mode == "loss_cap") {
        scan.config.mode = ClassifyMode::LossCap;
    } else {
        throw IntegrityError(path.string() + ": unknown classify_mode");
    }
    scan.config.sum_threshold = parse_double(need(kv, "sum_threshold"));
    scan.config.loss_cap = parse_double(need(kv, "loss_cap"));
    scan.s_min = parse_double(need(kv, "s_min"));
    scan.s_max = parse_double(need(kv, "s_max"));
    scan.n_max = static_cast<int>(parse_long(need(kv, "n_max")));
    if (scan.n_max < 1 || scan.n_max > kMaxScanExponent) {
        throw IntegrityError(path.string() + ": n_max out of range");
    }
    const bool with_intensity = parse_long(need(kv, "with_intensity")) != 0;

    const std::uint64_t bit_bytes = packed_bit_bytes(scan.n_max);
    const std::uint64_t intensity_bytes = with_intensity ? scan.point_count() * 8 : 0;
    const std::uint64_t expected = offset + bit_bytes + intensity_bytes + 8;
    if (bytes.size() != expected) {
        throw IntegrityError(path.string() + ": payload size mismatch");
    }

    scan.bits.assign(data + offset, data + offset + bit_bytes);
    offset += bit_bytes;
    if (with_intensity) {
        scan.intensities.resize(scan.point_count());
        for (std::uint64_t i = 0; i < scan.point_count(); ++i) {
            scan.intensities[i] = read_f64_le(data + offset + i * 8);
        }
    }
    return scan;
}

}  // namespace fracbound
