#include "xbadp/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include <json.hpp>

namespace xbadp {

using nlohmann::json;

ValidationError::ValidationError(std::vector<std::string> violations)
    : Error([&] {
          std::string msg = "instance validation failed";
          for (const auto& v : violations) msg += "\n  " + v;
          return msg;
      }()),
      violations_(std::move(violations)) {}

std::string_view to_string(SourceKind kind) noexcept {
    switch (kind) {
        case SourceKind::straight_run: return "straight_run";
        case SourceKind::split_run: return "split_run";
        case SourceKind::extra_trip: return "extra_trip";
        case SourceKind::unspecified: break;
    }
    return "unspecified";
}

int Instance::delta_min() const noexcept {
    int m = 0;
    for (const auto& k : pieces)
        if (m == 0 || k.duration < m) m = k.duration;
    return m;
}

Period Instance::source_start(int source_id) const { return pieces.at(first_piece(source_id)).start; }

int Instance::first_piece(int source_id) const { return sources.at(source_id).piece_ids.front(); }

bool xb_eligible(const Extraboard& xb, const WorkPiece& piece) noexcept {
    return piece.start >= xb.start && piece.last() <= xb.end;
}

bool ot_eligible(const OvertimeDriver& ot, const WorkPiece& piece, int delta_ot) noexcept {
    return piece.start >= ot.start && piece.start <= ot.start + delta_ot;
}

int ot_overrun(const OvertimeDriver& ot, const WorkPiece& piece, int delta_ot) noexcept {
    return std::max(0, piece.end() - (ot.start + delta_ot));
}

double ot_net_value(const Instance& inst, const OvertimeDriver& ot, const WorkPiece& piece) noexcept {
    return piece.reward - inst.c_ot * ot_overrun(ot, piece, inst.delta_ot);
}

std::vector<int> eligible_pieces_xb(const Extraboard& xb, const Instance& inst) {
    std::vector<int> out;
    for (const auto& k : inst.pieces)
        if (xb_eligible(xb, k)) out.push_back(k.id);
    return out;
}

std::vector<int> eligible_pieces_ot(const OvertimeDriver& ot, const Instance& inst) {
    std::vector<int> out;
    for (const auto& k : inst.pieces)
        if (ot_eligible(ot, k, inst.delta_ot)) out.push_back(k.id);
    return out;
}

std::vector<std::string> validate_instance(const Instance& inst) {
    std::vector<std::string> v;
    auto add = [&](std::string s) { v.push_back(std::move(s)); };
    const int K = static_cast<int>(inst.pieces.size());
    const int H = static_cast<int>(inst.sources.size());

    if (inst.T <= 0) add("instance: T must be positive");
    if (inst.period_minutes <= 0) add("instance: period_minutes must be positive");
    if (inst.delta_ot < 0) add("instance: delta_ot must be nonnegative");
    if (!(inst.c_ot >= 0.0) || !std::isfinite(inst.c_ot)) add("instance: c_ot must be a nonnegative finite real");

    for (int idx = 0; idx < K; ++idx) {
        const auto& k = inst.pieces[idx];
        const std::string tag = "piece " + std::to_string(k.id) + ": ";
        if (k.id != idx) add("piece at index " + std::to_string(idx) + ": id " + std::to_string(k.id) + " is not dense");
        if (k.duration < 1) add(tag + "duration must be at least 1");
        if (k.start < 0) add(tag + "starts before period 0");
        if (k.duration >= 1 && k.last() >= inst.T) add(tag + "extends past horizon");
        if (!(k.reward >= 0.0) || !std::isfinite(k.reward)) add(tag + "reward must be a nonnegative finite real");
        if (k.source_id < 0 || k.source_id >= H) add(tag + "unknown source " + std::to_string(k.source_id));
    }

    std::vector<int> listed(K, 0);
    for (int idx = 0; idx < H; ++idx) {
        const auto& h = inst.sources[idx];
        const std::string tag = "source " + std::to_string(h.id) + ": ";
        if (h.id != idx) add("source at index " + std::to_string(idx) + ": id " + std::to_string(h.id) + " is not dense");
        if (h.piece_ids.empty()) add(tag + "has no pieces");
        if (!(h.p >= 0.0 && h.p <= 1.0)) add(tag + "probability outside [0,1]");
        bool refs_ok = true;
        for (int kid : h.piece_ids) {
            if (kid < 0 || kid >= K) {
                add(tag + "unknown piece " + std::to_string(kid));
                refs_ok = false;
                continue;
            }
            ++listed[kid];
            if (inst.pieces[kid].source_id != h.id)
                add(tag + "piece " + std::to_string(kid) + " belongs to source " +
                    std::to_string(inst.pieces[kid].source_id));
        }
        if (refs_ok) {
            bool sorted = true, overlap = false;
            for (std::size_t r = 1; r < h.piece_ids.size(); ++r) {
                const auto& prev = inst.pieces[h.piece_ids[r - 1]];
                const auto& cur = inst.pieces[h.piece_ids[r]];
                if (cur.start < prev.start) sorted = false;
                else if (cur.start <= prev.last()) overlap = true;
            }
            if (!sorted) add(tag + "pieces not sorted by start");
            if (overlap) add(tag + "pieces overlap");
        }
        if (h.kind == SourceKind::split_run &&
            (h.split_at < 1 || h.split_at >= static_cast<int>(h.piece_ids.size())))
            add(tag + "split_at must separate two nonempty sessions");
    }
    for (int kid = 0; kid < K; ++kid) {
        if (listed[kid] == 0) add("piece " + std::to_string(kid) + ": not listed by any source");
        if (listed[kid] > 1) add("piece " + std::to_string(kid) + ": listed by more than one source");
    }

    for (int idx = 0; idx < static_cast<int>(inst.xbs.size()); ++idx) {
        const auto& j = inst.xbs[idx];
        const std::string tag = "xb " + std::to_string(j.id) + ": ";
        if (j.id != idx) add("xb at index " + std::to_string(idx) + ": id " + std::to_string(j.id) + " is not dense");
        if (j.start < 0) add(tag + "shift starts before period 0");
        if (j.end < j.start) add(tag + "shift ends before it starts");
        if (j.end >= inst.T) add(tag + "shift extends past horizon");
    }
    for (int idx = 0; idx < static_cast<int>(inst.ots.size()); ++idx) {
        const auto& i = inst.ots[idx];
        const std::string tag = "ot " + std::to_string(i.id) + ": ";
        if (i.id != idx) add("ot at index " + std::to_string(idx) + ": id " + std::to_string(i.id) + " is not dense");
        if (i.start < 0) add(tag + "reports before period 0");
        if (i.start + inst.delta_ot >= inst.T) add(tag + "minimum-pay window extends past horizon");
    }
    return v;
}

// ---------------------------------------------------------------------------
// Schedule file

namespace {

SourceKind parse_kind(const std::string& s, const std::string& where) {
    if (s == "straight_run") return SourceKind::straight_run;
    if (s == "split_run") return SourceKind::split_run;
    if (s == "extra_trip") return SourceKind::extra_trip;
    if (s == "unspecified") return SourceKind::unspecified;
    throw ParseError(where + ": unknown source kind '" + s + "'");
}

/// Reads an object's fields against a fixed key set. Unknown keys and missing required keys fail.
class Fields {
public:
    Fields(const json& obj, std::string where, std::initializer_list<const char*> required,
           std::initializer_list<const char*> optional)
        : obj_(obj), where_(std::move(where)) {
        if (!obj_.is_object()) throw ParseError(where_ + ": expected an object");
        std::set<std::string> known;
        for (const char* k : required) {
            known.insert(k);
            if (!obj_.contains(k)) throw ParseError(where_ + ": missing required key '" + k + "'");
        }
        for (const char* k : optional) known.insert(k);
        for (auto it = obj_.begin(); it != obj_.end(); ++it)
            if (!known.count(it.key())) throw ParseError(where_ + ": unknown key '" + it.key() + "'");
    }

    bool has(const char* key) const { return obj_.contains(key); }

    int integer(const char* key) const {
        const auto& v = obj_.at(key);
        if (!v.is_number_integer()) throw ParseError(where_ + "." + key + ": expected an integer");
        return v.get<int>();
    }
    double real(const char* key) const {
        const auto& v = obj_.at(key);
        if (!v.is_number()) throw ParseError(where_ + "." + key + ": expected a number");
        return v.get<double>();
    }
    std::string text(const char* key) const {
        const auto& v = obj_.at(key);
        if (!v.is_string()) throw ParseError(where_ + "." + key + ": expected a string");
        return v.get<std::string>();
    }
    const json& array(const char* key) const {
        const auto& v = obj_.at(key);
        if (!v.is_array()) throw ParseError(where_ + "." + key + ": expected an array");
        return v;
    }
    const std::string& where() const { return where_; }

private:
    const json& obj_;
    std::string where_;
};

}  // namespace

Instance load_schedule(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("schedule: invalid JSON: ") + e.what());
    }
    Fields top(doc, "schedule", {"version", "T", "period_minutes", "delta_ot", "c_ot", "pieces", "sources", "xbs", "ots"},
               {"name"});
    if (top.integer("version") != 1) throw ParseError("schedule.version: unsupported version");

    Instance inst;
    inst.T = top.integer("T");
    inst.period_minutes = top.integer("period_minutes");
    inst.delta_ot = top.integer("delta_ot");
    inst.c_ot = top.real("c_ot");

    const auto& pieces = top.array("pieces");
    for (std::size_t n = 0; n < pieces.size(); ++n) {
        Fields f(pieces[n], "pieces[" + std::to_string(n) + "]", {"id", "source_id", "start", "duration"},
                 {"reward", "route", "label"});
        WorkPiece k;
        k.id = f.integer("id");
        k.source_id = f.integer("source_id");
        k.start = f.integer("start");
        k.duration = f.integer("duration");
        k.reward = f.has("reward") ? f.real("reward") : k.duration * inst.period_minutes / 60.0;
        if (f.has("route")) k.route = f.integer("route");
        if (f.has("label")) k.label = f.text("label");
        inst.pieces.push_back(std::move(k));
    }
    const auto& sources = top.array("sources");
    for (std::size_t n = 0; n < sources.size(); ++n) {
        Fields f(sources[n], "sources[" + std::to_string(n) + "]", {"id", "piece_ids", "p"}, {"kind", "split_at", "label"});
        WorkSource h;
        h.id = f.integer("id");
        h.p = f.real("p");
        for (const auto& kid : f.array("piece_ids")) {
            if (!kid.is_number_integer()) throw ParseError(f.where() + ".piece_ids: expected integers");
            h.piece_ids.push_back(kid.get<int>());
        }
        if (f.has("kind")) h.kind = parse_kind(f.text("kind"), f.where());
        if (f.has("split_at")) h.split_at = f.integer("split_at");
        if (f.has("label")) h.label = f.text("label");
        inst.sources.push_back(std::move(h));
    }
    const auto& xbs = top.array("xbs");
    for (std::size_t n = 0; n < xbs.size(); ++n) {
        Fields f(xbs[n], "xbs[" + std::to_string(n) + "]", {"id", "start", "end"}, {"label"});
        Extraboard j{f.integer("id"), f.integer("start"), f.integer("end"), {}};
        if (f.has("label")) j.label = f.text("label");
        inst.xbs.push_back(std::move(j));
    }
    const auto& ots = top.array("ots");
    for (std::size_t n = 0; n < ots.size(); ++n) {
        Fields f(ots[n], "ots[" + std::to_string(n) + "]", {"id", "start"}, {"label"});
        OvertimeDriver i{f.integer("id"), f.integer("start"), {}};
        if (f.has("label")) i.label = f.text("label");
        inst.ots.push_back(std::move(i));
    }

    if (auto violations = validate_instance(inst); !violations.empty()) throw ValidationError(std::move(violations));
    return inst;
}

std::string save_schedule(const Instance& inst) {
    json doc;
    doc["version"] = 1;
    doc["T"] = inst.T;
    doc["period_minutes"] = inst.period_minutes;
    doc["delta_ot"] = inst.delta_ot;
    doc["c_ot"] = inst.c_ot;
    json pieces = json::array();
    for (const auto& k : inst.pieces) {
        json o{{"id", k.id}, {"source_id", k.source_id}, {"start", k.start}, {"duration", k.duration}, {"reward", k.reward}};
        if (k.route >= 0) o["route"] = k.route;
        if (!k.label.empty()) o["label"] = k.label;
        pieces.push_back(std::move(o));
    }
    json sources = json::array();
    for (const auto& h : inst.sources) {
        json o{{"id", h.id}, {"piece_ids", h.piece_ids}, {"p", h.p}};
        if (h.kind != SourceKind::unspecified) o["kind"] = std::string(to_string(h.kind));
        if (h.split_at >= 0) o["split_at"] = h.split_at;
        if (!h.label.empty()) o["label"] = h.label;
        sources.push_back(std::move(o));
    }
    json xbs = json::array();
    for (const auto& j : inst.xbs) {
        json o{{"id", j.id}, {"start", j.start}, {"end", j.end}};
        if (!j.label.empty()) o["label"] = j.label;
        xbs.push_back(std::move(o));
    }
    json ots = json::array();
    for (const auto& i : inst.ots) {
        json o{{"id", i.id}, {"start", i.start}};
        if (!i.label.empty()) o["label"] = i.label;
        ots.push_back(std::move(o));
    }
    doc["pieces"] = std::move(pieces);
    doc["sources"] = std::move(sources);
    doc["xbs"] = std::move(xbs);
    doc["ots"] = std::move(ots);
    return doc.dump();
}

std::string instance_hash(const Instance& inst) {
    const std::string bytes = save_schedule(inst);
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

double expected_open_hours(const Instance& inst) {
    double total = 0.0;
    for (const auto& h : inst.sources) {
        int periods = 0;
        for (int kid : h.piece_ids) periods += inst.pieces[kid].duration;
        total += h.p * periods * inst.period_hours();
    }
    return total;
}

double total_piece_hours(const Instance& inst) {
    double periods = 0;
    for (const auto& k : inst.pieces) periods += k.duration;
    return periods * inst.period_hours();
}

}  // namespace xbadp
