#include "mlisim/fleet.hpp"

#include <algorithm>
#include <cmath>

#include "mlisim/common.hpp"
#include "mlisim/csv.hpp"
#include "mlisim/numerics.hpp"

namespace mlisim::fleet {

const char* to_string(Drivetrain d) {
    switch (d) {
        case Drivetrain::FWD: return "FWD";
        case Drivetrain::RWD: return "RWD";
        case Drivetrain::AWD: return "AWD";
        case Drivetrain::Unknown: return "unknown";
    }
    return "?";
}

const char* to_string(InverterTech t) {
    switch (t) {
        case InverterTech::Si: return "Si";
        case InverterTech::SiC: return "SiC";
        case InverterTech::Mixed: return "mixed";
        case InverterTech::Unknown: return "unknown";
    }
    return "?";
}

const std::vector<std::string>& numeric_variables() {
    static const std::vector<std::string> vars = {
        "entry_year",    "range_km",       "consumption_kwh_per100",
        "battery_kwh",   "mass_kg",        "accel_0_100_s",
        "cost_eur",      "motor_power_kw", "motor_torque_nm",
        "dc_charge_kw",  "ac_charge_kw",   "sys_voltage_v",
        "length_m",      "width_m",        "height_m",
        "seats",         "payload_kg",     "boot_l",
        "tow_kg",        "warranty_km",    "one_stop_km"};
    return vars;
}

std::optional<double> variable_value(const FleetRecord& r, const std::string& variable) {
    if (variable == "entry_year") return static_cast<double>(r.entry_year);
    if (variable == "range_km") return r.range_km;
    if (variable == "battery_kwh") return r.battery_kwh;
    if (variable == "consumption_kwh_per100") return r.consumption_kwh_per100;
    if (variable == "mass_kg") return r.mass_kg;
    if (variable == "accel_0_100_s") return r.accel_0_100_s;
    if (variable == "cost_eur") return r.cost_eur;
    if (variable == "motor_power_kw") return r.motor_power_kw;
    if (variable == "motor_torque_nm") return r.motor_torque_nm;
    if (variable == "dc_charge_kw") return r.dc_charge_kw;
    if (variable == "ac_charge_kw") return r.ac_charge_kw;
    if (variable == "sys_voltage_v") return r.sys_voltage_v;
    if (variable == "length_m") return r.length_m;
    if (variable == "width_m") return r.width_m;
    if (variable == "height_m") return r.height_m;
    if (variable == "seats") return r.seats;
    if (variable == "payload_kg") return r.payload_kg;
    if (variable == "boot_l") return r.boot_l;
    if (variable == "tow_kg") return r.tow_kg;
    if (variable == "warranty_km") return r.warranty_km;
    if (variable == "one_stop_km") return r.one_stop_km;
    throw std::invalid_argument("unknown fleet variable: " + variable);
}

namespace {

std::optional<double> cell_value(const csv::Table& t, const std::vector<std::string>& row,
                                 const std::string& col, bool* malformed) {
    const auto idx = t.find_column(col);
    if (!idx || *idx >= row.size()) return std::nullopt;
    const std::string& cell = row[*idx];
    if (cell.empty()) return std::nullopt;
    const auto v = csv::parse_double(cell);
    if (!v) {
        if (malformed) *malformed = true;
        return std::nullopt;
    }
    return v;
}

std::optional<double> positive_or_reject(std::optional<double> v, const std::string& col,
                                         std::string* reason) {
    if (v && *v <= 0.0 && reason->empty())
        *reason = "nonpositive value in column " + col;
    return v;
}

}  // namespace

IngestReport ingest(const std::filesystem::path& path) {
    const auto table = csv::read_file(path);
    // The header must at least name the mandatory fields.
    for (const char* col : {"battery_kwh", "inverter_tech", "range_km"})
        if (!table.find_column(col))
            throw DataError(std::string("fleet file header lacks mandatory column ") + col);

    IngestReport report;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        bool malformed = false;
        std::string reason;

        FleetRecord rec;
        if (auto idx = table.find_column("model_id"); idx && *idx < row.size())
            rec.model_id = row[*idx];

        const auto year = cell_value(table, row, "entry_year", &malformed);
        const auto range = cell_value(table, row, "range_km", &malformed);
        const auto battery = cell_value(table, row, "battery_kwh", &malformed);
        std::string tech_str;
        if (auto idx = table.find_column("inverter_tech"); idx && *idx < row.size())
            tech_str = row[*idx];

        if (malformed) {
            report.rejected.push_back({i, "malformed numeric cell"});
            continue;
        }
        if (!battery || !range || tech_str.empty()) {
            report.rejected.push_back({i, "mandatory field missing"});
            continue;
        }
        if (!year) {
            report.rejected.push_back({i, "entry_year missing"});
            continue;
        }
        if (*year < 2005 || *year > 2035 || *year != std::floor(*year)) {
            report.rejected.push_back({i, "entry_year outside [2005, 2035]"});
            continue;
        }
        if (*battery <= 0.0 || *range <= 0.0) {
            report.rejected.push_back({i, "nonpositive mandatory value"});
            continue;
        }

        rec.entry_year = static_cast<int>(*year);
        rec.range_km = *range;
        rec.battery_kwh = *battery;
        if (tech_str == "Si") rec.inverter_tech = InverterTech::Si;
        else if (tech_str == "SiC") rec.inverter_tech = InverterTech::SiC;
        else if (tech_str == "mixed") rec.inverter_tech = InverterTech::Mixed;
        else if (tech_str == "unknown") rec.inverter_tech = InverterTech::Unknown;
        else {
            report.rejected.push_back({i, "unrecognized inverter_tech '" + tech_str + "'"});
            continue;
        }
        if (auto idx = table.find_column("drivetrain"); idx && *idx < row.size()) {
            const std::string& d = row[*idx];
            if (d == "FWD") rec.drivetrain = Drivetrain::FWD;
            else if (d == "RWD") rec.drivetrain = Drivetrain::RWD;
            else if (d == "AWD") rec.drivetrain = Drivetrain::AWD;
        }

        rec.consumption_kwh_per100 =
            positive_or_reject(cell_value(table, row, "consumption_kwh_per100", &malformed),
                               "consumption_kwh_per100", &reason);
        rec.mass_kg = positive_or_reject(cell_value(table, row, "mass_kg", &malformed), "mass_kg",
                                         &reason);
        rec.accel_0_100_s = positive_or_reject(
            cell_value(table, row, "accel_0_100_s", &malformed), "accel_0_100_s", &reason);
        rec.cost_eur =
            positive_or_reject(cell_value(table, row, "cost_eur", &malformed), "cost_eur", &reason);
        rec.motor_power_kw = positive_or_reject(
            cell_value(table, row, "motor_power_kw", &malformed), "motor_power_kw", &reason);
        rec.motor_torque_nm = positive_or_reject(
            cell_value(table, row, "motor_torque_nm", &malformed), "motor_torque_nm", &reason);
        rec.dc_charge_kw = positive_or_reject(cell_value(table, row, "dc_charge_kw", &malformed),
                                              "dc_charge_kw", &reason);
        rec.ac_charge_kw = positive_or_reject(cell_value(table, row, "ac_charge_kw", &malformed),
                                              "ac_charge_kw", &reason);
        rec.sys_voltage_v = positive_or_reject(cell_value(table, row, "sys_voltage_v", &malformed),
                                               "sys_voltage_v", &reason);
        rec.length_m =
            positive_or_reject(cell_value(table, row, "length_m", &malformed), "length_m", &reason);
        rec.width_m =
            positive_or_reject(cell_value(table, row, "width_m", &malformed), "width_m", &reason);
        rec.height_m =
            positive_or_reject(cell_value(table, row, "height_m", &malformed), "height_m", &reason);
        rec.seats = positive_or_reject(cell_value(table, row, "seats", &malformed), "seats", &reason);
        rec.payload_kg = positive_or_reject(cell_value(table, row, "payload_kg", &malformed),
                                            "payload_kg", &reason);
        rec.boot_l =
            positive_or_reject(cell_value(table, row, "boot_l", &malformed), "boot_l", &reason);
        rec.tow_kg =
            positive_or_reject(cell_value(table, row, "tow_kg", &malformed), "tow_kg", &reason);
        rec.warranty_km = positive_or_reject(cell_value(table, row, "warranty_km", &malformed),
                                             "warranty_km", &reason);
        rec.one_stop_km = positive_or_reject(cell_value(table, row, "one_stop_km", &malformed),
                                             "one_stop_km", &reason);

        if (malformed) {
            report.rejected.push_back({i, "malformed numeric cell"});
            continue;
        }
        if (!reason.empty()) {
            report.rejected.push_back({i, reason});
            continue;
        }
        report.records.push_back(std::move(rec));
    }
    return report;
}

Column remove_outliers_once(const Column& column, double z_cut, int* removed) {
    if (removed) *removed = 0;
    if (column.size() < 3) return column;
    std::vector<double> vals;
    vals.reserve(column.size());
    for (const auto& [idx, v] : column) vals.push_back(v);
    const double mu = num::mean(vals);
    const double sd = num::sample_std(vals);
    if (sd == 0.0) return column;
    Column out;
    out.reserve(column.size());
    for (const auto& e : column) {
        if (std::abs(e.second - mu) > z_cut * sd) {
            if (removed) ++*removed;
        } else {
            out.push_back(e);
        }
    }
    return out;
}

CorrelationReport correlation_report(std::span<const FleetRecord> records,
                                     const std::vector<std::string>& variables,
                                     const FilterPolicy& policy) {
    const std::size_t nv = variables.size();
    CorrelationReport rep;
    rep.variables = variables;
    rep.r.assign(nv * nv, std::numeric_limits<double>::quiet_NaN());
    rep.n_used.assign(nv * nv, 0);
    rep.variable_log.resize(nv);

    // Per-variable columns with one outlier pass.
    std::vector<Column> columns(nv);
    for (std::size_t v = 0; v < nv; ++v) {
        Column col;
        for (std::size_t i = 0; i < records.size(); ++i)
            if (auto val = variable_value(records[i], variables[v])) col.push_back({i, *val});
        int removed = 0;
        col = remove_outliers_once(col, policy.z_cut, &removed);
        rep.variable_log[v].outliers_removed = removed;
        rep.variable_log[v].n = static_cast<int>(col.size());
        if (col.size() >= 3 && col.size() <= 5000) {
            std::vector<double> vals;
            for (const auto& [idx, val] : col) vals.push_back(val);
            try {
                rep.variable_log[v].shapiro_p = stats::shapiro_wilk(vals).p_value;
            } catch (const std::invalid_argument&) {
                // constant column; left as NaN
            }
        }
        if (!(rep.variable_log[v].shapiro_p > policy.alpha))
            rep.normality_failures.push_back(variables[v]);
        columns[v] = std::move(col);
    }

    for (std::size_t i = 0; i < nv; ++i) {
        rep.r[i * nv + i] = 1.0;
        rep.n_used[i * nv + i] = static_cast<int>(columns[i].size());
    }

    for (std::size_t i = 0; i < nv; ++i) {
        for (std::size_t j = i + 1; j < nv; ++j) {
            PairLog log;
            // Pairwise complete cases of the outlier-filtered columns.
            std::vector<double> x, y;
            std::size_t pi = 0, pj = 0;
            while (pi < columns[i].size() && pj < columns[j].size()) {
                if (columns[i][pi].first == columns[j][pj].first) {
                    x.push_back(columns[i][pi].second);
                    y.push_back(columns[j][pj].second);
                    ++pi;
                    ++pj;
                } else if (columns[i][pi].first < columns[j][pj].first) {
                    ++pi;
                } else {
                    ++pj;
                }
            }
            const int n = static_cast<int>(x.size());
            rep.n_used[i * nv + j] = rep.n_used[j * nv + i] = n;

            if (n < 4) {
                log.gated_by = "insufficient_n";
                rep.pair_log[{i, j}] = log;
                continue;
            }
            const bool norm_i = rep.variable_log[i].shapiro_p > policy.alpha;
            const bool norm_j = rep.variable_log[j].shapiro_p > policy.alpha;
            try {
                log.bp_p = stats::breusch_pagan(x, y).p_value;
            } catch (const std::invalid_argument&) {
                log.gated_by = "zero_variance";
                rep.pair_log[{i, j}] = log;
                continue;
            }
            if (!norm_i || !norm_j) {
                log.gated_by = "shapiro";
            } else if (!(log.bp_p > policy.alpha)) {
                log.gated_by = "breusch_pagan";
            } else {
                try {
                    const double r = stats::pearson(x, y);
                    rep.r[i * nv + j] = rep.r[j * nv + i] = r;
                } catch (const std::invalid_argument&) {
                    log.gated_by = "zero_variance";
                }
            }
            rep.pair_log[{i, j}] = log;
        }
    }
    return rep;
}

std::vector<CohortWindow> default_cohort_windows() {
    return {{2010, 2014}, {2015, 2019}, {2020, 2025}};
}

std::vector<CohortStats> cohorts(std::span<const FleetRecord> records,
                                 std::span<const CohortWindow> windows,
                                 const std::vector<std::string>& variables) {
    std::vector<CohortStats> out;
    for (const auto& w : windows) {
        CohortStats cs;
        cs.window = w;
        for (const auto& var : variables) {
            std::vector<double> vals;
            for (const auto& rec : records) {
                if (rec.entry_year < w.start_year || rec.entry_year > w.end_year) continue;
                if (auto v = variable_value(rec, var)) vals.push_back(*v);
            }
            if (vals.empty()) continue;
            CohortCell cell;
            cell.count = static_cast<int>(vals.size());
            cell.mean = num::mean(vals);
            cell.stdev = num::sample_std(vals);
            cell.low_n = vals.size() < 2;
            cs.per_variable[var] = cell;
        }
        out.push_back(std::move(cs));
    }
    return out;
}

stats::Quartiles year_quartiles(std::span<const FleetRecord> records, const std::string& variable,
                                int year) {
    std::vector<double> vals;
    for (const auto& rec : records)
        if (rec.entry_year == year)
            if (auto v = variable_value(rec, variable)) vals.push_back(*v);
    if (vals.size() < 4)
        throw DataError("quartiles need at least 4 values for " + variable + " in " +
                        std::to_string(year));
    return stats::quartiles(vals);
}

}  // namespace mlisim::fleet
