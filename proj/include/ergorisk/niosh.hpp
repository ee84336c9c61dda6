#pragma once

// NIOSH revised lifting equation: multipliers, Recommended Weight Limit,
// Lifting Index and the three-band risk class used for labelling sessions.

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace ergorisk {

enum class UnitSystem { USCustomary, Metric };

/// 51 lb or 23 kg.
double load_constant(UnitSystem unit);

enum class Coupling { Good, Fair, Poor };
enum class DurationClass { UpTo1h, UpTo2h, UpTo8h };

struct LiftingTask {
    double weight = 0.0;     // lb or kg
    double h = 0.0;          // horizontal hand location
    double v = 0.0;          // vertical hand location
    double d = 0.0;          // vertical travel distance
    double a = 0.0;          // asymmetry angle, degrees
    Coupling coupling = Coupling::Good;
    double frequency = 1.0;  // lifts per minute
    DurationClass duration = DurationClass::UpTo1h;
};

/// Throws Error{InvalidTask} on non-finite or out-of-domain fields.
void validate(const LiftingTask& task);

struct MultiplierSet {
    double hm = 1.0;
    double vm = 1.0;
    double dm = 1.0;
    double am = 1.0;
    double fm = 1.0;
    double cm = 1.0;

    double product() const { return hm * vm * dm * am * fm * cm; }
};

enum class Location { Origin, Destination };

struct RwlResult {
    double rwl = 0.0;
    MultiplierSet multipliers;
    Location location = Location::Origin;
};

/// Ordered: Nominal < Increased < High.
enum class RiskLabel : int { Nominal = 0, Increased = 1, High = 2 };

inline constexpr std::array<RiskLabel, 3> kAllLabels = {
    RiskLabel::Nominal, RiskLabel::Increased, RiskLabel::High};

inline constexpr int index_of(RiskLabel l) { return static_cast<int>(l); }

/// "Nominal" / "Increased" / "High"
std::string_view to_string(RiskLabel label);
/// "NR" / "IR" / "HR"
std::string_view short_code(RiskLabel label);
/// Accepts the long names, the short codes, or the integer index.
RiskLabel parse_risk_label(std::string_view text);

std::string_view to_string(Coupling c);
Coupling parse_coupling(std::string_view text);
std::string_view to_string(DurationClass d);
DurationClass parse_duration(std::string_view text);

struct RiskThresholds {
    double t_nominal = 1.2;
    double t_high = 2.8;

    /// Banding observed in the experiment table (default).
    static RiskThresholds table_banding() { return {1.2, 2.8}; }
    /// Textbook guideline cutoffs, LI 1.0 and 3.0.
    static RiskThresholds guideline() { return {1.0, 3.0}; }
};

void validate(const RiskThresholds& t);

/// One row of the frequency-multiplier table. `values[duration][v_high]`,
/// where v_high selects the column for V >= 30 in (75 cm).
struct FrequencyRow {
    double frequency = 0.0;
    std::array<std::array<double, 2>, 3> values{};
};

class FrequencyTable {
public:
    explicit FrequencyTable(std::vector<FrequencyRow> rows);

    /// Embedded copy of the Applications Manual table.
    static const FrequencyTable& standard();
    static FrequencyTable from_csv(const std::filesystem::path& path);

    /// Nearest row at or above `frequency`; 0 beyond the last row.
    double lookup(double frequency, DurationClass duration, bool v_high) const;

    const std::vector<FrequencyRow>& rows() const { return rows_; }

private:
    std::vector<FrequencyRow> rows_;
};

/// `values[coupling][v_high]`
class CouplingTable {
public:
    explicit CouplingTable(std::array<std::array<double, 2>, 3> values) : values_(values) {}

    static const CouplingTable& standard();
    static CouplingTable from_csv(const std::filesystem::path& path);

    double lookup(Coupling coupling, bool v_high) const;

    const std::array<std::array<double, 2>, 3>& values() const { return values_; }

private:
    std::array<std::array<double, 2>, 3> values_;
};

double lookup_frequency_multiplier(double frequency, DurationClass duration, double v,
                                   UnitSystem unit = UnitSystem::USCustomary);
double lookup_coupling_multiplier(Coupling coupling, double v,
                                  UnitSystem unit = UnitSystem::USCustomary);

/// Each geometric multiplier is clamped to [0, 1] and set to 0 outside the
/// equation's valid range (US: H > 25, V > 70, D > 70, A > 135).
MultiplierSet compute_multipliers(const LiftingTask& task, UnitSystem unit);

double recommended_weight_limit(const MultiplierSet& m, UnitSystem unit);

RwlResult compute_rwl(const LiftingTask& task, UnitSystem unit,
                      Location location = Location::Origin);

/// Throws Error{DivisionUndefined} when rwl is 0.
double lifting_index(double weight, double rwl);

RiskLabel classify_risk(double li, const RiskThresholds& thresholds);

/// Half-up decimal rounding, tolerant of binary representation error
/// (0.985 rounds to 0.99).
double round_half_up(double x, int decimals);

/// Origin RWL, LI and the session label. The label is assigned from the LI
/// rounded to one decimal, the precision the experiment table reports.
struct SessionAssessment {
    RwlResult origin;
    double li = 0.0;
    double li_reported = 0.0;
    RiskLabel label = RiskLabel::Nominal;
};

SessionAssessment assess_session(const LiftingTask& task, UnitSystem unit,
                                 const RiskThresholds& thresholds);

/// A row of the lifting-task manifest CSV: session_id, load_lb, h_in, v_in,
/// d_in, a_deg, coupling, freq_per_min, duration_class.
struct ManifestRow {
    std::string session_id;
    LiftingTask task;
};

std::vector<ManifestRow> read_manifest(const std::filesystem::path& path);
std::vector<ManifestRow> parse_manifest(std::string_view csv_text,
                                        const std::string& source_name = "<memory>");
std::string manifest_to_csv(const std::vector<ManifestRow>& rows);

}  // namespace ergorisk
