#pragma once

#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mlisim/stats.hpp"

namespace mlisim::fleet {

enum class Drivetrain { FWD, RWD, AWD, Unknown };
enum class InverterTech { Si, SiC, Mixed, Unknown };

const char* to_string(Drivetrain d);
const char* to_string(InverterTech t);

/// One vehicle model. battery_kwh, inverter_tech and range_km are mandatory
/// at ingest; the remaining attributes may be absent.
struct FleetRecord {
    std::string model_id;
    int entry_year = 0;
    double range_km = 0.0;
    double battery_kwh = 0.0;
    InverterTech inverter_tech = InverterTech::Unknown;
    Drivetrain drivetrain = Drivetrain::Unknown;

    std::optional<double> consumption_kwh_per100;
    std::optional<double> mass_kg;
    std::optional<double> accel_0_100_s;
    std::optional<double> cost_eur;
    std::optional<double> motor_power_kw;
    std::optional<double> motor_torque_nm;
    std::optional<double> dc_charge_kw;
    std::optional<double> ac_charge_kw;
    std::optional<double> sys_voltage_v;
    std::optional<double> length_m;
    std::optional<double> width_m;
    std::optional<double> height_m;
    std::optional<double> seats;
    std::optional<double> payload_kg;
    std::optional<double> boot_l;
    std::optional<double> tow_kg;
    std::optional<double> warranty_km;
    std::optional<double> one_stop_km;
};

/// Names of the numeric variables addressable in reports.
const std::vector<std::string>& numeric_variables();

/// Value of a numeric variable, or nullopt when absent on this record.
std::optional<double> variable_value(const FleetRecord& r, const std::string& variable);

struct IngestReport {
    std::vector<FleetRecord> records;
    struct Rejection {
        std::size_t row;  // zero-based data row index
        std::string reason;
    };
    std::vector<Rejection> rejected;
};

/// Reads the fleet CSV (schema documented in the repository). Rows missing a
/// mandatory field or containing malformed numerics are dropped with a
/// logged reason; only an unreadable header is a file-level error.
IngestReport ingest(const std::filesystem::path& path);

struct FilterPolicy {
    double alpha = 0.05;
    double z_cut = 3.0;
};

using Column = std::vector<std::pair<std::size_t, double>>;  // (record index, value)

/// One z-score outlier pass (not iterated): removes entries with
/// |value - mean| > z_cut * sample std.
Column remove_outliers_once(const Column& column, double z_cut, int* removed = nullptr);

struct VariableLog {
    double shapiro_p = std::numeric_limits<double>::quiet_NaN();
    int outliers_removed = 0;
    int n = 0;
};

struct PairLog {
    double bp_p = std::numeric_limits<double>::quiet_NaN();
    std::string gated_by;  // "", "shapiro", "breusch_pagan", "insufficient_n", "zero_variance"
};

struct CorrelationReport {
    std::vector<std::string> variables;
    std::vector<double> r;        // n x n row-major, NaN for gated/undefined cells
    std::vector<int> n_used;      // n x n
    std::vector<VariableLog> variable_log;
    std::map<std::pair<std::size_t, std::size_t>, PairLog> pair_log;  // i < j
    // Variables that fail the normality gate outright (the alternative
    // drop-variable reading of the filter chain, logged for comparison).
    std::vector<std::string> normality_failures;

    double r_at(std::size_t i, std::size_t j) const { return r[i * variables.size() + j]; }
    int n_at(std::size_t i, std::size_t j) const { return n_used[i * variables.size() + j]; }
};

/// Filter chain and Pearson matrix: per-variable outlier removal, then
/// pairwise complete cases gated by Shapiro-Wilk normality of both variables
/// and Breusch-Pagan variance homogeneity of the pair (p > alpha each).
CorrelationReport correlation_report(std::span<const FleetRecord> records,
                                     const std::vector<std::string>& variables,
                                     const FilterPolicy& policy = {});

struct CohortWindow {
    int start_year = 0;
    int end_year = 0;  // inclusive
};

struct CohortCell {
    double mean = 0.0;
    double stdev = 0.0;  // sample standard deviation; 0 for a single record
    int count = 0;
    bool low_n = false;  // fewer than 2 values
};

struct CohortStats {
    CohortWindow window;
    std::map<std::string, CohortCell> per_variable;  // only variables with data
};

std::vector<CohortWindow> default_cohort_windows();

std::vector<CohortStats> cohorts(std::span<const FleetRecord> records,
                                 std::span<const CohortWindow> windows,
                                 const std::vector<std::string>& variables);

/// Quartiles of one variable over the models of a single entry year.
stats::Quartiles year_quartiles(std::span<const FleetRecord> records, const std::string& variable,
                                int year);

}  // namespace mlisim::fleet
