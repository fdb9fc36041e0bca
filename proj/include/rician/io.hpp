#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rician/channel.hpp"
#include "rician/constraints.hpp"
#include "rician/distribution.hpp"
#include "rician/kt.hpp"
#include "rician/mc.hpp"
#include "rician/optimizer.hpp"

namespace rician::io {

inline constexpr std::string_view kSweepSchema = "rician-capacity-sweep/v1";
inline constexpr std::string_view kSolutionSchema = "rician-capacity-solution/v1";
inline constexpr std::string_view kKTSchema = "rician-kt-report/v1";
inline constexpr std::string_view kMCSchema = "rician-mc-check/v1";

/// One solved SNR point; the CSV columns follow the field order.
struct SweepRecord {
    double snr_alpha = 0.0;
    std::string model;
    std::string constraint;
    double rician_k = 0.0;
    std::optional<double> kappa;
    double capacity_nats = 0.0;
    int n_points = 0;
    std::vector<double> locations;
    std::vector<double> probabilities;
    std::optional<double> lambda1;
    std::optional<double> lambda2;
    double kt_grid_min = 0.0;
    bool converged = false;

    bool operator==(const SweepRecord&) const = default;
};

SweepRecord make_record(const Solution& solution, const ChannelSpec& channel,
                        const ConstraintSet& constraints);

/// Scalars are written with 17 significant digits (exact round trip), list
/// entries with 12, `;`-separated. Optional fields are empty when absent.
std::string csv_header();
std::string to_csv_row(const SweepRecord& record);
/// Schema comment line plus header row.
void write_csv_preamble(std::ostream& out);
std::string to_csv(const std::vector<SweepRecord>& records);
/// Parses a document produced by to_csv. Throws DomainError on a missing or
/// unknown schema id, a header mismatch or a malformed row.
std::vector<SweepRecord> parse_csv(std::string_view text);

nlohmann::ordered_json to_json(const SweepRecord& record);
SweepRecord record_from_json(const nlohmann::json& j);
nlohmann::ordered_json sweep_to_json(const std::vector<SweepRecord>& records);
std::vector<SweepRecord> sweep_from_json(const nlohmann::json& j);

nlohmann::ordered_json to_json(const KTReport& report);
nlohmann::ordered_json to_json(const AmplitudeDistribution& F);

/// Plain text, one `location probability` pair per line; `#` starts a
/// comment; blank lines are ignored. Probabilities summing to one within
/// 1e-6 are renormalized. Throws DomainError on malformed content.
AmplitudeDistribution parse_distribution(std::string_view text);
std::string format_distribution(const AmplitudeDistribution& F);

/// Reads a whole file; throws DomainError when it cannot be opened.
std::string read_file(const std::string& path);

/// printf-style "%.{digits}g" formatting in the C locale.
std::string format_number(double v, int digits);

}  // namespace rician::io
