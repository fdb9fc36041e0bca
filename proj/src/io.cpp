#include "rician/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include "rician/error.hpp"

namespace rician::io {

namespace {

constexpr std::string_view kColumns[] = {
    "snr_alpha",     "model",     "constraint", "rician_k",         "kappa",
    "capacity_nats", "n_points",  "locations",  "probabilities",    "lambda1",
    "lambda2",       "kt_grid_min", "converged",
};
constexpr int kScalarDigits = 17;
constexpr int kListDigits = 12;

std::string format_list(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i)
            out += ';';
        out += format_number(v[i], kListDigits);
    }
    return out;
}

// Rounds to the precision lists are written with, so records round-trip exactly.
std::vector<double> list_precision(std::vector<double> v) {
    for (double& x : v)
        x = std::strtod(format_number(x, kListDigits).c_str(), nullptr);
    return v;
}

std::string format_optional(const std::optional<double>& v) {
    return v ? format_number(*v, kScalarDigits) : std::string();
}

double parse_double(std::string_view s, std::string_view what) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw DomainError("malformed number '" + std::string(s) + "' in " + std::string(what));
    return v;
}

std::optional<double> parse_optional(std::string_view s, std::string_view what) {
    if (s.empty())
        return std::nullopt;
    return parse_double(s, what);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = s.find(sep, start);
        out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos)
            return out;
        start = pos + 1;
    }
}

std::vector<double> parse_list(std::string_view s, std::string_view what) {
    std::vector<double> out;
    if (s.empty())
        return out;
    for (std::string_view part : split(s, ';'))
        out.push_back(parse_double(part, what));
    return out;
}

std::string_view trim(std::string_view s) {
    const auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
    while (!s.empty() && ws(s.front()))
        s.remove_prefix(1);
    while (!s.empty() && ws(s.back()))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> lines_of(std::string_view text) {
    std::vector<std::string_view> out;
    for (std::string_view line : split(text, '\n')) {
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        out.push_back(line);
    }
    return out;
}

}  // namespace

std::string format_number(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

SweepRecord make_record(const Solution& solution, const ChannelSpec& channel,
                        const ConstraintSet& constraints) {
    SweepRecord r;
    r.snr_alpha = constraints.alpha();
    r.model = std::string(to_string(channel.model));
    r.constraint = std::string(constraints.name());
    r.rician_k = channel.rician_k;
    r.kappa = constraints.kappa();
    r.capacity_nats = solution.capacity_nats;
    r.n_points = static_cast<int>(solution.distribution.size());
    r.locations = list_precision(solution.distribution.locations());
    r.probabilities = list_precision(solution.distribution.probabilities());
    if (constraints.multiplier_count() >= 1)
        r.lambda1 = solution.report.lambda1;
    if (constraints.multiplier_count() >= 2)
        r.lambda2 = solution.report.lambda2;
    r.kt_grid_min = solution.report.grid_min;
    r.converged = solution.converged;
    return r;
}

std::string csv_header() {
    std::string out;
    for (std::size_t i = 0; i < std::size(kColumns); ++i) {
        if (i)
            out += ',';
        out += kColumns[i];
    }
    return out;
}

std::string to_csv_row(const SweepRecord& r) {
    if (r.locations.size() != static_cast<std::size_t>(r.n_points) ||
        r.probabilities.size() != static_cast<std::size_t>(r.n_points))
        throw DomainError("record lists do not match n_points");
    std::string out;
    out += format_number(r.snr_alpha, kScalarDigits) + ',';
    out += r.model + ',';
    out += r.constraint + ',';
    out += format_number(r.rician_k, kScalarDigits) + ',';
    out += format_optional(r.kappa) + ',';
    out += format_number(r.capacity_nats, kScalarDigits) + ',';
    out += std::to_string(r.n_points) + ',';
    out += format_list(r.locations) + ',';
    out += format_list(r.probabilities) + ',';
    out += format_optional(r.lambda1) + ',';
    out += format_optional(r.lambda2) + ',';
    out += format_number(r.kt_grid_min, kScalarDigits) + ',';
    out += r.converged ? "true" : "false";
    return out;
}

void write_csv_preamble(std::ostream& out) {
    out << "# schema: " << kSweepSchema << '\n' << csv_header() << '\n';
}

std::string to_csv(const std::vector<SweepRecord>& records) {
    std::ostringstream out;
    write_csv_preamble(out);
    for (const SweepRecord& r : records)
        out << to_csv_row(r) << '\n';
    return out.str();
}

std::vector<SweepRecord> parse_csv(std::string_view text) {
    const std::vector<std::string_view> lines = lines_of(text);
    const std::string schema_line = "# schema: " + std::string(kSweepSchema);
    std::size_t i = 0;
    if (lines.empty() || !lines[0].starts_with("# schema:"))
        throw DomainError("CSV lacks a schema line");
    if (lines[0] != schema_line)
        throw DomainError("unknown CSV schema: " + std::string(trim(lines[0].substr(9))));
    if (lines.size() < 2 || lines[1] != csv_header())
        throw DomainError("CSV header does not match the sweep schema");
    std::vector<SweepRecord> out;
    for (i = 2; i < lines.size(); ++i) {
        if (lines[i].empty())
            continue;
        const std::vector<std::string_view> f = split(lines[i], ',');
        if (f.size() != std::size(kColumns))
            throw DomainError("CSV row " + std::to_string(i + 1) + " has " +
                              std::to_string(f.size()) + " fields");
        SweepRecord r;
        r.snr_alpha = parse_double(f[0], "snr_alpha");
        r.model = std::string(f[1]);
        r.constraint = std::string(f[2]);
        r.rician_k = parse_double(f[3], "rician_k");
        r.kappa = parse_optional(f[4], "kappa");
        r.capacity_nats = parse_double(f[5], "capacity_nats");
        r.n_points = static_cast<int>(parse_double(f[6], "n_points"));
        r.locations = parse_list(f[7], "locations");
        r.probabilities = parse_list(f[8], "probabilities");
        r.lambda1 = parse_optional(f[9], "lambda1");
        r.lambda2 = parse_optional(f[10], "lambda2");
        r.kt_grid_min = parse_double(f[11], "kt_grid_min");
        if (f[12] != "true" && f[12] != "false")
            throw DomainError("converged must be true or false");
        r.converged = f[12] == "true";
        if (r.locations.size() != static_cast<std::size_t>(r.n_points) ||
            r.probabilities.size() != static_cast<std::size_t>(r.n_points))
            throw DomainError("CSV row " + std::to_string(i + 1) + ": list lengths differ from n_points");
        out.push_back(std::move(r));
    }
    return out;
}

nlohmann::ordered_json to_json(const SweepRecord& r) {
    nlohmann::ordered_json j;
    const auto opt = [](const std::optional<double>& v) {
        return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
    };
    j["snr_alpha"] = r.snr_alpha;
    j["model"] = r.model;
    j["constraint"] = r.constraint;
    j["rician_k"] = r.rician_k;
    j["kappa"] = opt(r.kappa);
    j["capacity_nats"] = r.capacity_nats;
    j["n_points"] = r.n_points;
    j["locations"] = r.locations;
    j["probabilities"] = r.probabilities;
    j["lambda1"] = opt(r.lambda1);
    j["lambda2"] = opt(r.lambda2);
    j["kt_grid_min"] = r.kt_grid_min;
    j["converged"] = r.converged;
    return j;
}

SweepRecord record_from_json(const nlohmann::json& j) {
    const auto opt = [&](const char* key) -> std::optional<double> {
        if (!j.contains(key) || j.at(key).is_null())
            return std::nullopt;
        return j.at(key).get<double>();
    };
    try {
        SweepRecord r;
        r.snr_alpha = j.at("snr_alpha").get<double>();
        r.model = j.at("model").get<std::string>();
        r.constraint = j.at("constraint").get<std::string>();
        r.rician_k = j.at("rician_k").get<double>();
        r.kappa = opt("kappa");
        r.capacity_nats = j.at("capacity_nats").get<double>();
        r.n_points = j.at("n_points").get<int>();
        r.locations = j.at("locations").get<std::vector<double>>();
        r.probabilities = j.at("probabilities").get<std::vector<double>>();
        r.lambda1 = opt("lambda1");
        r.lambda2 = opt("lambda2");
        r.kt_grid_min = j.at("kt_grid_min").get<double>();
        r.converged = j.at("converged").get<bool>();
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw DomainError(std::string("malformed sweep record: ") + e.what());
    }
}

nlohmann::ordered_json sweep_to_json(const std::vector<SweepRecord>& records) {
    nlohmann::ordered_json j;
    j["schema"] = kSweepSchema;
    j["records"] = nlohmann::ordered_json::array();
    for (const SweepRecord& r : records)
        j["records"].push_back(to_json(r));
    return j;
}

std::vector<SweepRecord> sweep_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("schema") || j.at("schema") != kSweepSchema)
        throw DomainError("JSON document is not a " + std::string(kSweepSchema) + " sweep");
    std::vector<SweepRecord> out;
    for (const auto& r : j.at("records"))
        out.push_back(record_from_json(r));
    return out;
}

nlohmann::ordered_json to_json(const KTReport& r) {
    nlohmann::ordered_json j;
    j["lambda1"] = r.lambda1;
    j["lambda2"] = r.lambda2;
    j["capacity_nats"] = r.capacity_nats;
    j["grid_min"] = r.grid_min;
    j["argmin_r"] = r.argmin_r;
    j["mass_point_residuals"] = r.mass_point_residuals;
    j["feasible"] = r.feasible;
    j["underdetermined"] = r.underdetermined;
    j["multiplier_residual"] = r.multiplier_residual;
    j["tolerance"] = r.tolerance;
    j["pass"] = r.pass;
    j["grid_spec"] = r.grid_spec;
    if (!r.failure.empty())
        j["failure"] = r.failure;
    if (!r.curve_r.empty()) {
        j["curve"]["r"] = r.curve_r;
        j["curve"]["lhs"] = r.curve_lhs;
    }
    return j;
}

nlohmann::ordered_json to_json(const AmplitudeDistribution& F) {
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (const MassPoint& mp : F.points())
        j.push_back({{"location", mp.location}, {"probability", mp.probability}});
    return j;
}

AmplitudeDistribution parse_distribution(std::string_view text) {
    std::vector<MassPoint> pts;
    const std::vector<std::string_view> lines = lines_of(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        std::string_view line = lines[i];
        if (const std::size_t hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        std::vector<std::string_view> fields;
        std::size_t pos = 0;
        while (pos < line.size()) {
            while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t'))
                ++pos;
            std::size_t end = pos;
            while (end < line.size() && line[end] != ' ' && line[end] != '\t')
                ++end;
            if (end > pos)
                fields.push_back(line.substr(pos, end - pos));
            pos = end;
        }
        if (fields.size() != 2)
            throw DomainError("distribution line " + std::to_string(i + 1) +
                              ": expected 'location probability'");
        const std::string where = "distribution line " + std::to_string(i + 1);
        pts.push_back({parse_double(fields[0], where), parse_double(fields[1], where)});
    }
    if (pts.empty())
        throw DomainError("distribution file has no mass points");
    for (const MassPoint& mp : pts)
        if (!(mp.probability > 0.0) || !std::isfinite(mp.probability) ||
            !std::isfinite(mp.location) || mp.location < 0.0)
            throw DomainError("distribution entries need location >= 0 and probability > 0");
    return AmplitudeDistribution::normalized(std::move(pts), 1e-6);
}

std::string format_distribution(const AmplitudeDistribution& F) {
    std::string out = "# location probability\n";
    for (const MassPoint& mp : F.points())
        out += format_number(mp.location, kScalarDigits) + ' ' +
               format_number(mp.probability, kScalarDigits) + '\n';
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DomainError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace rician::io
