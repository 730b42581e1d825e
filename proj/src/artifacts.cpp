#include "xbadp/artifacts.hpp"

#include <json.hpp>

#include "xbadp/schedule.hpp"

namespace xbadp {

using nlohmann::json;

const XbValueTable& ArtifactCache::xb_values(const Instance& inst, Period s, Period e) {
    auto key = std::make_pair(s, e);
    auto it = xbv_.find(key);
    if (it == xbv_.end()) it = xbv_.emplace(key, train_xb_values(inst, Extraboard{-1, s, e, {}})).first;
    return it->second;
}

const OtValueTable& ArtifactCache::ot_values(const Instance& inst, Period s) {
    auto it = otv_.find(s);
    if (it == otv_.end()) it = otv_.emplace(s, train_ot_values(inst, OvertimeDriver{-1, s, {}})).first;
    return it->second;
}

const XbLossTable& ArtifactCache::xb_loss(const Instance& inst, Period s, Period e, int n_max,
                                          const LossOptions& opts) {
    auto key = std::make_tuple(s, e, n_max, opts.seed);
    auto it = xbl_.find(key);
    if (it == xbl_.end()) {
        const auto& table = xb_values(inst, s, e);
        it = xbl_.emplace(key, train_xb_loss(inst, Extraboard{-1, s, e, {}}, table, n_max, opts)).first;
    }
    return it->second;
}

const OtLossTable& ArtifactCache::ot_loss(const Instance& inst, Period s, int n_max, const LossOptions& opts) {
    auto key = std::make_tuple(s, n_max, opts.seed);
    auto it = otl_.find(key);
    if (it == otl_.end()) it = otl_.emplace(key, train_ot_loss(inst, OvertimeDriver{-1, s, {}}, n_max, opts)).first;
    return it->second;
}

ValueArtifacts train_artifacts(const Instance& inst, const TrainOptions& opts, ArtifactCache* cache) {
    ArtifactCache local;
    ArtifactCache& c = cache ? *cache : local;
    ValueArtifacts a;
    a.instance_hash = instance_hash(inst);
    a.n_max = compute_n_max(inst);
    for (const auto& j : inst.xbs) {
        a.xb_tables.push_back(c.xb_values(inst, j.start, j.end));
        a.xb_tables.back().j = j.id;
        if (opts.train_losses) {
            a.xb_losses.push_back(c.xb_loss(inst, j.start, j.end, a.n_max, opts.loss));
            a.xb_losses.back().j = j.id;
        }
    }
    for (const auto& i : inst.ots) {
        a.ot_tables.push_back(c.ot_values(inst, i.start));
        a.ot_tables.back().i = i.id;
        if (opts.train_losses) {
            a.ot_losses.push_back(c.ot_loss(inst, i.start, a.n_max, opts.loss));
            a.ot_losses.back().i = i.id;
        }
    }
    return a;
}

void train_planning_period(const Instance& inst, int shift_periods, int n_max, const TrainOptions& opts,
                           ArtifactCache& cache) {
    for (Period s = 0; s + shift_periods <= inst.T; ++s) {
        cache.xb_values(inst, s, s + shift_periods - 1);
        if (opts.train_losses) cache.xb_loss(inst, s, s + shift_periods - 1, n_max, opts.loss);
    }
    for (Period s = 0; s + inst.delta_ot < inst.T; ++s) {
        cache.ot_values(inst, s);
        if (opts.train_losses) cache.ot_loss(inst, s, n_max, opts.loss);
    }
}

std::string save_artifacts(const ValueArtifacts& a) {
    json doc;
    doc["version"] = 1;
    doc["instance_hash"] = a.instance_hash;
    doc["n_max"] = a.n_max;
    json xb = json::array(), ot = json::array(), xbl = json::array(), otl = json::array();
    for (const auto& t : a.xb_tables) xb.push_back({{"j", t.j}, {"s", t.s}, {"e", t.e}, {"rows", t.rows}});
    for (const auto& t : a.ot_tables) ot.push_back({{"i", t.i}, {"s", t.s}, {"values", t.values}});
    for (const auto& l : a.xb_losses) xbl.push_back({{"j", l.j}, {"s", l.s}, {"e", l.e}, {"values", l.slopes}});
    for (const auto& l : a.ot_losses) otl.push_back({{"i", l.i}, {"s", l.s}, {"values", l.slopes}});
    doc["xb_tables"] = std::move(xb);
    doc["ot_tables"] = std::move(ot);
    doc["xb_losses"] = std::move(xbl);
    doc["ot_losses"] = std::move(otl);
    return doc.dump();
}

ValueArtifacts load_artifacts(std::string_view text) {
    try {
        const json doc = json::parse(text.begin(), text.end());
        if (doc.at("version").get<int>() != 1) throw ParseError("artifacts.version: unsupported version");
        ValueArtifacts a;
        a.instance_hash = doc.at("instance_hash").get<std::string>();
        a.n_max = doc.at("n_max").get<int>();
        for (const auto& t : doc.at("xb_tables"))
            a.xb_tables.push_back({t.at("j").get<int>(), t.at("s").get<int>(), t.at("e").get<int>(),
                                   t.at("rows").get<std::vector<std::vector<double>>>()});
        for (const auto& t : doc.at("ot_tables"))
            a.ot_tables.push_back({t.at("i").get<int>(), t.at("s").get<int>(), t.at("values").get<std::vector<double>>()});
        if (doc.contains("xb_losses"))
            for (const auto& l : doc.at("xb_losses"))
                a.xb_losses.push_back({l.at("j").get<int>(), l.at("s").get<int>(), l.at("e").get<int>(),
                                       l.at("values").get<std::vector<double>>()});
        if (doc.contains("ot_losses"))
            for (const auto& l : doc.at("ot_losses"))
                a.ot_losses.push_back({l.at("i").get<int>(), l.at("s").get<int>(), l.at("values").get<std::vector<double>>()});
        return a;
    } catch (const json::exception& e) {
        throw ParseError(std::string("artifacts: ") + e.what());
    }
}

void check_artifacts(const ValueArtifacts& a, const Instance& inst, const std::string& inst_hash) {
    if (a.instance_hash != inst_hash)
        throw ContractViolation("artifacts were trained for instance " + a.instance_hash + ", not " + inst_hash);
    if (a.xb_tables.size() != inst.xbs.size() || a.ot_tables.size() != inst.ots.size())
        throw ContractViolation("artifacts do not cover the roster");
    if (a.has_losses() && (a.xb_losses.size() != inst.xbs.size() || a.ot_losses.size() != inst.ots.size()))
        throw ContractViolation("artifact losses do not cover the roster");
}

}  // namespace xbadp
