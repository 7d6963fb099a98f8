#include "mlisim/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mlisim/csv.hpp"
#include "mlisim/fleet.hpp"
#include "mlisim/numerics.hpp"
#include "mlisim/pipeline.hpp"
#include "mlisim/version.hpp"

namespace mlisim {

using nlohmann::json;

namespace {

std::string hash_hex(std::uint64_t h) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

json provenance(std::uint64_t config_hash) {
    return json{{"config_hash", hash_hex(config_hash)}, {"version", MLISIM_VERSION}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << text;
}

void write_json(const std::filesystem::path& path, const json& j) {
    write_text(path, j.dump(2) + "\n");
}

std::string csv_provenance_line(std::uint64_t config_hash) {
    return "# config_hash=" + hash_hex(config_hash) + " version=" MLISIM_VERSION "\n";
}

json cycle_result_json(const SimulationOutput& sim, std::uint64_t config_hash) {
    const auto& r = sim.result;
    json j;
    j["_provenance"] = provenance(config_hash);
    j["topology"] = sim.topology_id;
    j["e_loss_per100_kwh"] = r.e_loss_per100_kwh;
    j["breakdown_per100_kwh"] = {{"inv_sw", r.breakdown_per100_kwh.inv_sw},
                                 {"inv_cond", r.breakdown_per100_kwh.inv_cond},
                                 {"mot_f", r.breakdown_per100_kwh.mot_f},
                                 {"mot_h", r.breakdown_per100_kwh.mot_h}};
    if (r.e_loss_per100_kwh > 0.0) {
        j["shares"] = {{"inv_sw", r.breakdown_per100_kwh.inv_sw / r.e_loss_per100_kwh},
                       {"inv_cond", r.breakdown_per100_kwh.inv_cond / r.e_loss_per100_kwh},
                       {"mot_f", r.breakdown_per100_kwh.mot_f / r.e_loss_per100_kwh},
                       {"mot_h", r.breakdown_per100_kwh.mot_h / r.e_loss_per100_kwh}};
    }
    j["mode_share_3l"] = r.mode_share_3l;
    j["distance_km"] = r.distance_km;
    return j;
}

void write_losses_csv(const std::filesystem::path& path, const SimulationOutput& sim,
                      std::uint64_t config_hash) {
    std::ostringstream os;
    os << csv_provenance_line(config_hash);
    os << "t_s,dt_s,speed_mps,motor_speed_radps,motor_torque_nm,mode,"
          "p_inv_sw_w,p_inv_cond_w,p_mot_f_w,p_mot_h_w\n";
    for (std::size_t i = 0; i < sim.points.size(); ++i) {
        const auto& cp = sim.points[i];
        // interval-mode and interval losses were averaged onto samples; emit
        // the per-interval values used for the integration
        const auto& mode = sim.interval_modes[i];
        const LossSample& a = sim.series[i];
        const LossSample& b = sim.series[i + 1];
        const std::vector<std::string> row = {
            csv::format_double(cp.t_s),
            csv::format_double(cp.dt_s),
            csv::format_double(cp.speed_mps),
            csv::format_double(cp.op.motor_speed_radps),
            csv::format_double(cp.op.motor_torque_nm),
            to_string(mode),
            csv::format_double(0.5 * (a.inv_sw_w + b.inv_sw_w)),
            csv::format_double(0.5 * (a.inv_cond_w + b.inv_cond_w)),
            csv::format_double(0.5 * (a.mot_f_w + b.mot_f_w)),
            csv::format_double(0.5 * (a.mot_h_w + b.mot_h_w))};
        csv::write_row(os, row);
    }
    write_text(path, os.str());
}

json operating_point_json(const OperatingPoint& op) {
    return json{{"motor_speed_radps", op.motor_speed_radps},
                {"motor_torque_nm", op.motor_torque_nm},
                {"dc_voltage_v", op.dc_voltage_v},
                {"mod_index", op.elec.mod_index},
                {"power_factor", op.elec.power_factor},
                {"phase_current_peak_a", op.elec.phase_current_peak_a},
                {"fundamental_freq_hz", op.elec.fundamental_freq_hz}};
}

}  // namespace

void cmd_simulate(const RunConfig& cfg) {
    const auto sims = simulate_all(cfg);
    for (const auto& sim : sims) {
        write_json(cfg.output_dir / (sim.topology_id + "_cycle_result.json"),
                   cycle_result_json(sim, cfg.config_hash));
        write_losses_csv(cfg.output_dir / (sim.topology_id + "_losses.csv"), sim,
                         cfg.config_hash);
    }
}

void cmd_size(const RunConfig& cfg) {
    const auto runs = size_topologies(cfg);
    for (const auto& run : runs) {
        json j;
        j["_provenance"] = provenance(cfg.config_hash);
        j["topology"] = run.topology_id;
        j["full_load_areas"] = run.full_load_areas;
        j["per_role_area"] = run.result.per_role_area;
        j["total_area_mm2"] = run.total_area_mm2;
        j["reference_area_mm2"] = run.reference_area_mm2;
        j["total_area_delta"] = run.result.total_area_delta;
        j["added_area_delta"] = run.result.added_area_delta;
        if (run.has_partial) {
            j["binding_constraint"] = run.result.binding_constraint;
            j["design_op"] = operating_point_json(run.result.design_op);
            j["junction_temps_c"] = run.result.junction_temps_c;
            j["ripple_delta_u_v"] = run.result.ripple_delta_u_v;
        }
        write_json(cfg.output_dir / (run.topology_id + "_sizing.json"), j);
    }
}

void cmd_compare(const RunConfig& cfg) {
    const auto cmp = compare_topologies(cfg);

    json j;
    j["_provenance"] = provenance(cfg.config_hash);
    j["baseline"] = cmp.baseline;
    j["battery_price_eur_per_kwh"] = cmp.battery_price_eur_per_kwh;
    j["ranges_km"] = cmp.ranges_km;
    json rows = json::array();
    for (const auto& row : cmp.rows)
        rows.push_back({{"topology", row.topology},
                        {"range_km", row.range_km},
                        {"delta_e_per100_kwh", row.delta_e_per100_kwh},
                        {"delta_e_kwh", row.delta_e_kwh},
                        {"delta_cost_eur", row.delta_cost_eur}});
    j["rows"] = rows;
    write_json(cfg.output_dir / "comparison.json", j);

    std::ostringstream os;
    os << csv_provenance_line(cfg.config_hash);
    os << "topology,range_km,delta_e_per100_kwh,delta_e_kwh,delta_cost_eur\n";
    for (const auto& row : cmp.rows) {
        const std::vector<std::string> fields = {
            row.topology, csv::format_double(row.range_km),
            csv::format_double(row.delta_e_per100_kwh), csv::format_double(row.delta_e_kwh),
            csv::format_double(row.delta_cost_eur)};
        csv::write_row(os, fields);
    }
    write_text(cfg.output_dir / "comparison.csv", os.str());
}

void cmd_fleet(const FleetOptions& opts) {
    std::ifstream in(opts.dataset);
    if (!in) throw DataError("cannot open fleet dataset: " + opts.dataset.string());
    std::stringstream buf;
    buf << in.rdbuf();
    const std::uint64_t data_hash = num::fnv1a(buf.str());

    const auto ingested = fleet::ingest(opts.dataset);
    const auto& variables =
        opts.variables.empty() ? fleet::numeric_variables() : opts.variables;

    json ingest_log;
    ingest_log["accepted"] = ingested.records.size();
    json rejected = json::array();
    for (const auto& rej : ingested.rejected)
        rejected.push_back({{"row", rej.row}, {"reason", rej.reason}});
    ingest_log["rejected"] = rejected;

    for (const auto& report : opts.reports) {
        if (report == "corr") {
            const auto rep = fleet::correlation_report(ingested.records, variables);
            const std::size_t nv = rep.variables.size();

            json j;
            j["_provenance"] = provenance(data_hash);
            j["variables"] = rep.variables;
            json r_rows = json::array(), n_rows = json::array();
            for (std::size_t i = 0; i < nv; ++i) {
                json r_row = json::array(), n_row = json::array();
                for (std::size_t k = 0; k < nv; ++k) {
                    r_row.push_back(rep.r_at(i, k));
                    n_row.push_back(rep.n_at(i, k));
                }
                r_rows.push_back(r_row);
                n_rows.push_back(n_row);
            }
            j["r_matrix"] = r_rows;
            j["n_used"] = n_rows;
            json var_log = json::object();
            for (std::size_t i = 0; i < nv; ++i)
                var_log[rep.variables[i]] = {{"shapiro_p", rep.variable_log[i].shapiro_p},
                                             {"outliers_removed", rep.variable_log[i].outliers_removed},
                                             {"n", rep.variable_log[i].n}};
            j["variable_log"] = var_log;
            json pair_log = json::array();
            for (const auto& [key, log] : rep.pair_log)
                pair_log.push_back({{"x", rep.variables[key.first]},
                                    {"y", rep.variables[key.second]},
                                    {"bp_p", log.bp_p},
                                    {"gated_by", log.gated_by}});
            j["pair_log"] = pair_log;
            j["normality_failures"] = rep.normality_failures;
            j["ingest"] = ingest_log;
            write_json(opts.output_dir / "fleet_corr.json", j);

            std::ostringstream mat;
            mat << csv_provenance_line(data_hash);
            mat << "variable";
            for (const auto& v : rep.variables) mat << ',' << v;
            mat << '\n';
            for (std::size_t i = 0; i < nv; ++i) {
                mat << rep.variables[i];
                for (std::size_t k = 0; k < nv; ++k) {
                    const double r = rep.r_at(i, k);
                    mat << ',' << (std::isnan(r) ? "" : csv::format_double(r));
                }
                mat << '\n';
            }
            write_text(opts.output_dir / "fleet_corr.csv", mat.str());

            std::ostringstream lng;
            lng << csv_provenance_line(data_hash);
            lng << "var_x,var_y,r,n_used,bp_p,gated_by\n";
            for (const auto& [key, log] : rep.pair_log) {
                const double r = rep.r_at(key.first, key.second);
                const std::vector<std::string> fields = {
                    rep.variables[key.first],
                    rep.variables[key.second],
                    std::isnan(r) ? "" : csv::format_double(r),
                    std::to_string(rep.n_at(key.first, key.second)),
                    std::isnan(log.bp_p) ? "" : csv::format_double(log.bp_p),
                    log.gated_by};
                csv::write_row(lng, fields);
            }
            write_text(opts.output_dir / "fleet_corr_long.csv", lng.str());
        } else if (report == "cohorts") {
            const auto windows = fleet::default_cohort_windows();
            const auto stats = fleet::cohorts(ingested.records, windows, variables);

            json j;
            j["_provenance"] = provenance(data_hash);
            json windows_json = json::array();
            for (const auto& cs : stats) {
                json w;
                w["window"] = {{"start_year", cs.window.start_year},
                               {"end_year", cs.window.end_year}};
                json vars = json::object();
                for (const auto& [name, cell] : cs.per_variable)
                    vars[name] = {{"mean", cell.mean},
                                  {"std", cell.stdev},
                                  {"count", cell.count},
                                  {"low_n", cell.low_n}};
                w["variables"] = vars;
                windows_json.push_back(w);
            }
            j["cohorts"] = windows_json;
            j["ingest"] = ingest_log;
            write_json(opts.output_dir / "fleet_cohorts.json", j);

            std::ostringstream os;
            os << csv_provenance_line(data_hash);
            os << "window_start,window_end,variable,mean,std,count,low_n\n";
            for (const auto& cs : stats) {
                for (const auto& [name, cell] : cs.per_variable) {
                    const std::vector<std::string> fields = {
                        std::to_string(cs.window.start_year),
                        std::to_string(cs.window.end_year),
                        name,
                        csv::format_double(cell.mean),
                        csv::format_double(cell.stdev),
                        std::to_string(cell.count),
                        cell.low_n ? "1" : "0"};
                    csv::write_row(os, fields);
                }
            }
            write_text(opts.output_dir / "fleet_cohorts.csv", os.str());
        } else if (report == "quartiles") {
            const auto q =
                fleet::year_quartiles(ingested.records, opts.quartile_variable, opts.quartile_year);
            int n = 0;
            for (const auto& rec : ingested.records)
                if (rec.entry_year == opts.quartile_year &&
                    fleet::variable_value(rec, opts.quartile_variable))
                    ++n;
            json j;
            j["_provenance"] = provenance(data_hash);
            j["variable"] = opts.quartile_variable;
            j["year"] = opts.quartile_year;
            j["q1"] = q.q1;
            j["median"] = q.median;
            j["q3"] = q.q3;
            j["whisker_max"] = q.whisker_max;
            j["n"] = n;
            write_json(opts.output_dir / "fleet_quartiles.json", j);
        } else {
            throw ConfigError("unknown fleet report kind: " + report);
        }
    }
}

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"Drivetrain efficiency and cost co-simulation toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_dir, ranges_str;
    double battery_price = 0.0;
    std::uint64_t seed = 0;
    bool have_price = false, have_seed = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "run configuration (JSON)")->required();
        sub->add_option("--out", out_dir, "output directory override");
        sub->add_option("--battery-price", battery_price, "EUR per kWh override")
            ->each([&](const std::string&) { have_price = true; });
        sub->add_option("--ranges", ranges_str, "comma-separated ranges in km");
        sub->add_option("--seed", seed, "Monte Carlo seed override")
            ->each([&](const std::string&) { have_seed = true; });
    };

    auto* sim = app.add_subcommand("simulate", "cycle simulation per topology");
    add_common(sim);
    auto* size = app.add_subcommand("size", "full- and partial-load device sizing");
    add_common(size);
    auto* compare = app.add_subcommand("compare", "topology cost comparison table");
    add_common(compare);

    FleetOptions fleet_opts;
    std::string fleet_reports, fleet_vars, fleet_out;
    auto* fleet_cmd = app.add_subcommand("fleet", "fleet statistics reports");
    fleet_cmd->add_option("--dataset", fleet_opts.dataset, "fleet CSV file")->required();
    fleet_cmd->add_option("--report", fleet_reports, "corr,cohorts,quartiles (default all)");
    fleet_cmd->add_option("--variables", fleet_vars, "comma-separated variable list");
    fleet_cmd->add_option("--out", fleet_out, "output directory");
    fleet_cmd->add_option("--year", fleet_opts.quartile_year, "quartile report year");
    fleet_cmd->add_option("--quartile-variable", fleet_opts.quartile_variable,
                          "quartile report variable");

    std::vector<std::string> argv_rev(args.rbegin(), args.rend());
    try {
        app.parse(argv_rev);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }

    auto split_doubles = [](const std::string& s) {
        std::vector<double> out;
        std::stringstream ss(s);
        std::string item;
        while (std::getline(ss, item, ',')) {
            const auto v = csv::parse_double(item);
            if (!v) throw ConfigError("invalid numeric list entry: " + item);
            out.push_back(*v);
        }
        return out;
    };

    try {
        if (fleet_cmd->parsed()) {
            if (!fleet_out.empty()) fleet_opts.output_dir = fleet_out;
            if (!fleet_reports.empty()) {
                fleet_opts.reports.clear();
                std::stringstream ss(fleet_reports);
                std::string item;
                while (std::getline(ss, item, ',')) fleet_opts.reports.push_back(item);
            }
            if (!fleet_vars.empty()) {
                std::stringstream ss(fleet_vars);
                std::string item;
                while (std::getline(ss, item, ',')) fleet_opts.variables.push_back(item);
            }
            cmd_fleet(fleet_opts);
            return 0;
        }

        CliOverrides ov;
        if (!out_dir.empty()) ov.output_dir = out_dir;
        if (have_price) ov.battery_price = battery_price;
        if (!ranges_str.empty()) ov.ranges_km = split_doubles(ranges_str);
        if (have_seed) ov.seed = seed;
        const RunConfig cfg = load_run_config(config_path, ov);

        if (sim->parsed()) cmd_simulate(cfg);
        else if (size->parsed()) cmd_size(cfg);
        else if (compare->parsed()) cmd_compare(cfg);
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return 3;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 4;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace mlisim
