#include "syndr/json_io.hpp"

#include "syndr/error.hpp"

#include <fstream>

namespace syndr {

namespace {

ojson histogram_json(const std::map<std::size_t, std::size_t>& h) {
    ojson out = ojson::object();
    for (const auto& [size, count] : h) out[std::to_string(size)] = count;
    return out;
}

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
    const auto it = j.find(key);
    if (it == j.end()) return fallback;
    try {
        return it->get<T>();
    } catch (const nlohmann::json::exception&) {
        throw Error(ErrorCode::invalid_config, std::string("config field '") + key + "' has the wrong type");
    }
}

} // namespace

ojson to_json(const ddcup::SelectionResult& r) {
    ojson out;
    out["stats"] = {{"median", r.stats.median}, {"max", r.stats.max}, {"count", r.stats.count}};
    out["selected"] = r.selected_ids;
    ojson rejected = ojson::array();
    for (const auto& rej : r.rejected) rejected.push_back({{"id", rej.id}, {"reason", ddcup::to_string(rej.reason)}});
    out["rejected"] = std::move(rejected);
    out["dropped_by_cap"] = r.dropped_by_cap;
    return out;
}

ojson to_json(const drcdown::DrcDownReport& r) {
    ojson out;
    out["n_before"] = r.n_before;
    out["n_after"] = r.n_after;
    out["removed"] = r.n_before - r.n_after;
    out["similar_pairs"] = r.pairs;
    out["m"] = r.m;
    out["clusters_thinned"] = r.clusters_thinned;
    out["size_histogram_before"] = histogram_json(r.size_histogram_before);
    out["size_histogram_after"] = histogram_json(r.size_histogram_after);
    out["eta_before"] = r.eta_before;
    out["eta_after"] = r.eta_after;
    return out;
}

ojson to_json(const bound::ClusterStats& s, bool include_sizes) {
    ojson out;
    out["m"] = s.m;
    out["n"] = s.n;
    out["eta"] = s.eta;
    std::map<std::size_t, std::size_t> h;
    for (auto k : s.sizes) ++h[k];
    out["size_histogram"] = histogram_json(h);
    if (include_sizes) out["sizes"] = s.sizes;
    return out;
}

ojson to_json(const bound::BoundReport& r) {
    ojson out;
    out["m"] = r.m;
    out["eta"] = r.eta;
    out["delta"] = r.delta;
    out["rad"] = r.rad;
    out["term_rad"] = r.term_rad;
    out["term_mcdiarmid"] = r.term_mcdiarmid;
    out["term_bernstein_sqrt"] = r.term_bernstein_sqrt;
    out["term_bernstein_lin"] = r.term_bernstein_lin;
    out["total"] = r.total;
    out["data_terms_only"] = r.data_terms_only;
    return out;
}

ojson to_json(const bound::TrendReport& r) {
    ojson out;
    out["sweep_axis"] = bound::to_string(r.axis);
    out["seeds"] = r.seeds;
    out["test_size"] = r.test_size;
    out["risk_weighting"] = "per-sample";
    out["rank_correlation"] = r.rank_correlation;
    ojson points = ojson::array();
    for (const auto& p : r.points) {
        ojson jp;
        jp["axis_value"] = p.axis_value;
        jp["m"] = p.m;
        jp["n"] = p.n;
        jp["eta"] = p.eta;
        jp["mean_gap"] = p.mean_gap;
        jp["std_gap"] = p.std_gap;
        jp["stderr_gap"] = p.stderr_gap;
        jp["mean_train_mse"] = p.mean_train_mse;
        jp["mean_test_mse"] = p.mean_test_mse;
        jp["bound_data_terms"] = p.bound.total;
        points.push_back(std::move(jp));
    }
    out["points"] = std::move(points);
    return out;
}

ojson to_json(const syngen::NeighborAssignment& a) {
    ojson out;
    out["new_ref_id"] = a.new_ref_id;
    ojson nbrs = ojson::array();
    for (const auto& n : a.neighbors) nbrs.push_back({{"id", n.id}, {"distance", n.distance}, {"weight", n.weight}});
    out["neighbors"] = std::move(nbrs);
    return out;
}

bound::ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw Error(ErrorCode::invalid_config, "experiment config must be a JSON object");
    bound::ExperimentConfig c;
    const auto axis = get_or<std::string>(j, "axis", "m");
    if (axis == "m") {
        c.axis = bound::SweepAxis::m;
    } else if (axis == "eta") {
        c.axis = bound::SweepAxis::eta;
    } else {
        throw Error(ErrorCode::invalid_config, "axis must be \"m\" or \"eta\"");
    }
    const auto target = get_or<std::string>(j, "target", "sinusoid");
    if (target == "sinusoid") {
        c.target = bound::Target::sinusoid;
    } else if (target == "constant") {
        c.target = bound::Target::constant;
    } else {
        throw Error(ErrorCode::invalid_config, "target must be \"sinusoid\" or \"constant\"");
    }
    c.dim = get_or(j, "dim", c.dim);
    c.radius = get_or(j, "radius", c.radius);
    c.label_noise = get_or(j, "label_noise", c.label_noise);
    c.knn_k = get_or(j, "knn_k", c.knn_k);
    c.test_size = get_or(j, "test_size", c.test_size);
    c.seeds = get_or(j, "seeds", c.seeds);
    c.delta = get_or(j, "delta", c.delta);
    c.m_grid = get_or(j, "m_grid", c.m_grid);
    c.cluster_size = get_or(j, "cluster_size", c.cluster_size);
    c.skew_m = get_or(j, "skew_m", c.skew_m);
    c.skew_n = get_or(j, "skew_n", c.skew_n);
    c.singleton_fractions = get_or(j, "singleton_fractions", c.singleton_fractions);
    bound::validate(c);
    return c;
}

void write_json(const std::filesystem::path& path, const ojson& value) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
    out << value.dump(2) << '\n';
    if (!out) throw Error(ErrorCode::io, "short write to " + path.string());
}

nlohmann::json read_json(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::invalid_config, "invalid JSON in " + path.string() + ": " + e.what());
    }
}

} // namespace syndr
