#include "mlisim/economics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mlisim {

CycleResult integrate_cycle(std::span<const LossSample> losses, const DriveCycle& cycle) {
    cycle.validate();
    if (losses.size() != cycle.samples.size())
        throw std::invalid_argument("loss series not aligned with cycle samples");
    const double distance_m = cycle.distance_m();
    if (distance_m <= 0.0) throw std::invalid_argument("zero-distance cycle");

    double e_sw = 0.0, e_cond = 0.0, e_f = 0.0, e_h = 0.0, t_3l = 0.0;
    for (std::size_t i = 1; i < losses.size(); ++i) {
        const double dt = cycle.samples[i].t_s - cycle.samples[i - 1].t_s;
        e_sw += 0.5 * (losses[i].inv_sw_w + losses[i - 1].inv_sw_w) * dt;
        e_cond += 0.5 * (losses[i].inv_cond_w + losses[i - 1].inv_cond_w) * dt;
        e_f += 0.5 * (losses[i].mot_f_w + losses[i - 1].mot_f_w) * dt;
        e_h += 0.5 * (losses[i].mot_h_w + losses[i - 1].mot_h_w) * dt;
        const double ind_prev = losses[i - 1].mode == LevelMode::L3 ? 1.0 : 0.0;
        const double ind_cur = losses[i].mode == LevelMode::L3 ? 1.0 : 0.0;
        t_3l += 0.5 * (ind_prev + ind_cur) * dt;
    }

    const double per100 = 100.0e3 / distance_m;  // cycle-to-100-km normalization
    const double j_to_kwh = 1.0 / 3.6e6;
    CycleResult r;
    r.breakdown_per100_kwh.inv_sw = e_sw * per100 * j_to_kwh;
    r.breakdown_per100_kwh.inv_cond = e_cond * per100 * j_to_kwh;
    r.breakdown_per100_kwh.mot_f = e_f * per100 * j_to_kwh;
    r.breakdown_per100_kwh.mot_h = e_h * per100 * j_to_kwh;
    r.e_loss_per100_kwh = r.breakdown_per100_kwh.inv_sw + r.breakdown_per100_kwh.inv_cond +
                          r.breakdown_per100_kwh.mot_f + r.breakdown_per100_kwh.mot_h;
    r.mode_share_3l = t_3l / cycle.duration_s();
    r.distance_km = distance_m / 1000.0;
    return r;
}

CostDelta cost_delta(double delta_e_per100_kwh, double range_km,
                     double battery_price_eur_per_kwh) {
    if (range_km <= 0.0) throw std::invalid_argument("range must be positive");
    if (battery_price_eur_per_kwh <= 0.0)
        throw std::invalid_argument("battery price must be positive");
    CostDelta d;
    d.delta_e_total_kwh = delta_e_per100_kwh * range_km / 100.0;
    d.delta_cost_eur = d.delta_e_total_kwh * battery_price_eur_per_kwh;
    return d;
}

CostComparison compare_from_results(
    const std::vector<std::pair<std::string, CycleResult>>& results, const std::string& baseline,
    std::span<const double> ranges_km, double battery_price_eur_per_kwh) {
    auto base = std::find_if(results.begin(), results.end(),
                             [&](const auto& r) { return r.first == baseline; });
    if (base == results.end())
        throw std::invalid_argument("baseline topology '" + baseline + "' missing from results");

    CostComparison cmp;
    cmp.baseline = baseline;
    cmp.battery_price_eur_per_kwh = battery_price_eur_per_kwh;
    cmp.ranges_km.assign(ranges_km.begin(), ranges_km.end());
    for (const auto& [id, res] : results) {
        const double delta_per100 = res.e_loss_per100_kwh - base->second.e_loss_per100_kwh;
        for (double range : ranges_km) {
            const auto d = cost_delta(delta_per100, range, battery_price_eur_per_kwh);
            cmp.rows.push_back({id, range, delta_per100, d.delta_e_total_kwh, d.delta_cost_eur});
        }
    }
    return cmp;
}

}  // namespace mlisim
