#include "demine/report.hpp"

#include <cmath>
#include <vector>

#include "demine/errors.hpp"

namespace demine {

using nlohmann::json;

ScoreRange mine_f_estimate_range(ScoreRange s) {
    return {s.lower - std::exp(s.upper) + 1.0, s.upper - std::exp(s.lower) + 1.0};
}

void validate(const EstimateReport& r) {
    if (!std::isfinite(r.point_estimate)) throw InputError("report: point estimate is not finite");
    if (r.epsilon && !(*r.epsilon >= 0.0)) throw InputError("report: epsilon must be >= 0");
    if (r.range && r.bound_kind == BoundKind::mine_f) {
        const ScoreRange ok = mine_f_estimate_range(*r.range);
        const double slack = 1e-9 * (1.0 + std::abs(ok.lower) + std::abs(ok.upper));
        if (r.point_estimate < ok.lower - slack || r.point_estimate > ok.upper + slack)
            throw InputError("report: MINE-f estimate outside [L - e^U + 1, U - e^L + 1]");
    }
    if (r.significance.has_value() != r.epsilon.has_value())
        throw InputError("report: significance requires an epsilon and vice versa");
    if (r.significance && *r.significance != significance_verdict(r.point_estimate, *r.epsilon))
        throw InputError("report: significance inconsistent with estimate and epsilon");
}

json to_json(const EstimateReport& r, bool include_timing) {
    json j;
    j["method"] = r.method;
    j["bound_kind"] = r.bound_kind ? json(to_string(*r.bound_kind)) : json(nullptr);
    j["point_estimate"] = r.point_estimate;
    j["epsilon"] = r.epsilon ? json(*r.epsilon) : json(nullptr);
    j["delta"] = r.delta;
    j["n_val"] = r.n_val;
    j["n_train"] = r.n_train;
    j["L"] = r.range ? json(r.range->lower) : json(nullptr);
    j["U"] = r.range ? json(r.range->upper) : json(nullptr);
    j["significance"] = r.significance ? json(to_string(*r.significance)) : json(nullptr);
    j["seed"] = r.seed;
    if (r.mine_bound) j["mine_bound"] = *r.mine_bound;
    if (r.eb1_bound) j["eb1_bound"] = *r.eb1_bound;
    j["settings"] = r.settings;
    if (include_timing) j["wall_time"] = r.wall_time;
    return j;
}

EstimateReport report_from_json(const json& j) {
    EstimateReport r;
    r.method = j.at("method").get<std::string>();
    if (!j.at("bound_kind").is_null()) r.bound_kind = parse_bound_kind(j.at("bound_kind").get<std::string>());
    r.point_estimate = j.at("point_estimate").get<double>();
    if (!j.at("epsilon").is_null()) r.epsilon = j.at("epsilon").get<double>();
    r.delta = j.at("delta").get<double>();
    r.n_val = j.at("n_val").get<std::size_t>();
    r.n_train = j.at("n_train").get<std::size_t>();
    if (!j.at("L").is_null()) r.range = ScoreRange{j.at("L").get<double>(), j.at("U").get<double>()};
    if (!j.at("significance").is_null())
        r.significance = j.at("significance").get<std::string>() == "dependent" ? Significance::dependent
                                                                                 : Significance::not_significant;
    r.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("mine_bound")) r.mine_bound = j["mine_bound"].get<double>();
    if (j.contains("eb1_bound")) r.eb1_bound = j["eb1_bound"].get<double>();
    if (j.contains("settings")) r.settings = j["settings"];
    if (j.contains("wall_time")) r.wall_time = j["wall_time"].get<double>();
    return r;
}

json to_json(const Critic& c) {
    json j;
    j["x_layers"] = c.encoder(Side::x).layer_dims;
    j["z_layers"] = c.encoder(Side::z).layer_dims;
    j["M"] = c.scale();
    j["t"] = c.shift();
    j["parameters"] = std::vector<double>(c.parameters().data(), c.parameters().data() + c.parameters().size());
    return j;
}

Critic critic_from_json(const json& j) {
    try {
        Critic c(j.at("x_layers").get<std::vector<std::size_t>>(), j.at("z_layers").get<std::vector<std::size_t>>(),
                 j.at("M").get<double>(), j.at("t").get<double>());
        const auto p = j.at("parameters").get<std::vector<double>>();
        c.set_parameters(Eigen::Map<const Vector>(p.data(), static_cast<Eigen::Index>(p.size())));
        return c;
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed critic record: ") + e.what());
    }
}

} // namespace demine
