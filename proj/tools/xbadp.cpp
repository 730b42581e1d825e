// xbadp command line: gen | train | simulate | report | serve.
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "xbadp/artifacts.hpp"
#include "xbadp/errors.hpp"
#include "xbadp/harness.hpp"
#include "xbadp/instance_gen.hpp"
#include "xbadp/report.hpp"
#include "xbadp/service.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace xbadp;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << text;
}

struct RunConfig {
    json raw = json::object();
    fs::path base_dir = ".";
    std::string instance_path;
    json gen_params;  // null unless generating
    std::vector<PolicyKind> policies{PolicyKind::approx, PolicyKind::myopic_xb_first, PolicyKind::practice,
                                     PolicyKind::perfect_info};
    int n_paths = 100;
    double p_scale = 1.0;
    std::vector<int> n_xb_list;
    std::optional<OtRosterSpec> ot_roster;
    bool wait_time = false;
    PolicyConfig policy;
    bool train_losses = true;
    int n_scenarios = 500;
};

OtRosterSpec ot_spec_from_json(const json& j) {
    OtRosterSpec s;
    if (j.is_string()) {
        if (j.get<std::string>() != "default") throw ParseError("ot_roster: expected \"default\" or an object");
        return s;
    }
    for (const auto& [k, v] : j.items()) {
        if (k == "am_count") s.am_count = v.get<int>();
        else if (k == "am_spacing") s.am_spacing = v.get<int>();
        else if (k == "pm_count") s.pm_count = v.get<int>();
        else if (k == "pm_spacing") s.pm_spacing = v.get<int>();
        else if (k == "am") s.am = {v.at(0).get<int>(), v.at(1).get<int>()};
        else if (k == "pm") s.pm = {v.at(0).get<int>(), v.at(1).get<int>()};
        else throw ParseError("ot_roster: unknown key '" + k + "'");
    }
    return s;
}

RunConfig load_config(const std::string& path) {
    RunConfig c;
    if (path.empty()) return c;
    c.base_dir = fs::path(path).parent_path();
    try {
        c.raw = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ParseError("config " + path + ": " + e.what());
    }
    for (const auto& [k, v] : c.raw.items()) {
        if (k == "instance") c.instance_path = v.get<std::string>();
        else if (k == "gen_params") c.gen_params = v;
        else if (k == "policies") {
            c.policies.clear();
            for (const auto& p : v) c.policies.push_back(parse_policy(p.get<std::string>()));
        } else if (k == "n_paths") c.n_paths = v.get<int>();
        else if (k == "p_scale") c.p_scale = v.get<double>();
        else if (k == "n_xb_list") c.n_xb_list = v.get<std::vector<int>>();
        else if (k == "ot_roster") {
            if (!v.is_null()) c.ot_roster = ot_spec_from_json(v);
        } else if (k == "reward_mode") {
            const auto m = v.get<std::string>();
            if (m != "ordinary" && m != "wait_time") throw ParseError("reward_mode must be ordinary or wait_time");
            c.wait_time = m == "wait_time";
        } else if (k == "l_max") c.policy.l_max = v.get<int>();
        else if (k == "overrule_p") c.policy.overrule_p = v.get<double>();
        else if (k == "solver_deadline_ms") {
            if (!v.is_null()) c.policy.deadline_ms = v.get<double>();
        } else if (k == "prune_dominated") c.policy.prune_dominated = v.get<bool>();
        else if (k == "train_losses") c.train_losses = v.get<bool>();
        else if (k == "n_scenarios") c.n_scenarios = v.get<int>();
        else throw ParseError("config: unknown key '" + k + "'");
    }
    if (!c.instance_path.empty() && !c.gen_params.is_null())
        throw ParseError("config: give either 'instance' or 'gen_params', not both");
    return c;
}

/// The schedule every roster variant shares, with rewards in the configured mode.
Instance base_instance(const RunConfig& c, std::uint64_t seed) {
    Instance inst;
    bool synthetic = false;
    if (!c.instance_path.empty()) {
        fs::path p = c.instance_path;
        if (p.is_relative()) p = c.base_dir / p;
        inst = load_schedule(read_file(p));
    } else {
        json overlay = c.gen_params.is_null() ? json::object() : c.gen_params;
        std::string preset = "miway";
        if (overlay.contains("preset")) {
            preset = overlay.at("preset").get<std::string>();
            overlay.erase("preset");
        }
        if (preset != "miway" && preset != "synthetic") throw ParseError("gen_params.preset must be miway or synthetic");
        synthetic = preset == "synthetic";
        GenParams base = synthetic ? synthetic_params() : miway_params();
        GenParams gp = gen_params_from_json(overlay.dump(), base);
        inst = synthetic ? gen_synthetic_large(gp, seed) : gen_miway_like(gp, seed);
    }
    if (c.wait_time) {
        int routes = 0;
        for (const auto& k : inst.pieces) routes = std::max(routes, k.route + 1);
        WaitTimeConfig w = synthetic || routes > 7 ? synthetic_wait_config() : miway_wait_config();
        if (static_cast<int>(w.route_multipliers.size()) < routes)
            w.route_multipliers = linear_multipliers(routes, w.route_multipliers.front(), w.route_multipliers.back());
        inst = apply_wait_time_rewards(inst, w);
    }
    return inst;
}

/// One instance per roster size in n_xb_list, or the schedule's own roster when the list is empty.
std::vector<std::pair<std::string, Instance>> roster_variants(const RunConfig& c, const Instance& base) {
    std::vector<std::pair<std::string, Instance>> out;
    auto ots = [&] { return c.ot_roster ? gen_ot_roster(base, *c.ot_roster) : base.ots; };
    if (c.n_xb_list.empty()) {
        out.emplace_back("roster", with_roster(base, base.xbs, ots()));
        return out;
    }
    for (int n : c.n_xb_list)
        out.emplace_back("nxb" + std::to_string(n), with_roster(base, place_report_times(base, n), ots()));
    return out;
}

TrainOptions train_options(const RunConfig& c, std::uint64_t seed) {
    TrainOptions t;
    t.train_losses = c.train_losses;
    t.loss.n_scenarios = c.n_scenarios;
    t.loss.seed = seed;
    return t;
}

std::string utc_now() {
    std::time_t now = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return buf;
}

struct Manifest {
    json j;
    Manifest(const std::string& command, std::uint64_t seed, const RunConfig& c, const std::string& config_path) {
        j = {{"tool", "xbadp"}, {"version", kVersion}, {"command", command}, {"seed", seed},
             {"config_path", config_path}, {"config", c.raw}, {"started_utc", utc_now()},
             {"instances", json::object()}, {"outputs", json::array()}};
    }
    void output(const std::string& name) { j["outputs"].push_back(name); }
    void write(const fs::path& dir, double seconds) {
        j["finished_utc"] = utc_now();
        j["elapsed_s"] = seconds;
        write_file(dir / "manifest.json", j.dump(2) + "\n");
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int cmd_gen(const RunConfig& c, std::uint64_t seed, const fs::path& out, const std::string& cfg_path) {
    const auto t0 = std::chrono::steady_clock::now();
    Manifest m("gen", seed, c, cfg_path);
    const Instance base = base_instance(c, seed);
    write_file(out / "schedule.json", save_schedule(base));
    m.output("schedule.json");
    m.j["instances"]["base"] = instance_hash(base);
    for (const auto& [label, inst] : roster_variants(c, base)) {
        const std::string name = "schedule_" + label + ".json";
        write_file(out / name, save_schedule(inst));
        m.output(name);
        m.j["instances"][label] = instance_hash(inst);
        std::cout << name << "  " << inst.pieces.size() << " pieces, " << inst.xbs.size() << " XBs, " << inst.ots.size()
                  << " OTs, expected open hours " << expected_open_hours(inst) << "\n";
    }
    m.write(out, seconds_since(t0));
    return 0;
}

int cmd_train(const RunConfig& c, std::uint64_t seed, const fs::path& out, const std::string& cfg_path) {
    const auto t0 = std::chrono::steady_clock::now();
    Manifest m("train", seed, c, cfg_path);
    const Instance base = base_instance(c, seed);
    const Instance scaled = c.p_scale == 1.0 ? base : scale_probabilities(base, c.p_scale);
    ArtifactCache cache;
    for (const auto& [label, inst] : roster_variants(c, scaled)) {
        const auto t1 = std::chrono::steady_clock::now();
        const auto art = train_artifacts(inst, train_options(c, seed), &cache);
        const std::string name = "artifacts_" + label + ".json";
        write_file(out / name, save_artifacts(art));
        write_file(out / ("schedule_" + label + ".json"), save_schedule(inst));
        m.output(name);
        m.output("schedule_" + label + ".json");
        m.j["instances"][label] = instance_hash(inst);
        m.j["train_seconds"][label] = seconds_since(t1);
        std::cout << name << "  n_max " << art.n_max << ", " << seconds_since(t1) << " s\n";
    }
    m.write(out, seconds_since(t0));
    return 0;
}

int cmd_simulate(const RunConfig& c, std::uint64_t seed, const fs::path& out, const std::string& cfg_path) {
    const auto t0 = std::chrono::steady_clock::now();
    Manifest m("simulate", seed, c, cfg_path);
    const Instance base = base_instance(c, seed);
    MetricsTable table;
    std::ostringstream paths_csv;
    paths_csv << "roster,path,path_seed,policy,total_reward,covered_hours,uncovered_hours,revealed_hours\n";
    ArtifactCache cache;
    for (const auto& [label, inst] : roster_variants(c, base)) {
        EvalConfig ec;
        ec.policies = c.policies;
        ec.n_paths = c.n_paths;
        ec.seed = seed;
        ec.p_scale = c.p_scale;
        ec.policy_cfg = c.policy;
        ec.train = train_options(c, seed);
        const auto ev = evaluate(inst, ec, nullptr, &cache);
        m.j["instances"][label] = instance_hash(inst);
        for (const auto& row : ev.table.rows) table.rows.push_back(row);
        for (const auto& [policy, eps] : ev.episodes)
            for (std::size_t i = 0; i < eps.size(); ++i)
                paths_csv << label << ',' << i << ',' << eps[i].path_seed << ',' << to_string(policy) << ','
                          << eps[i].total_reward << ',' << eps[i].covered_hours << ',' << eps[i].uncovered_hours << ','
                          << eps[i].revealed_hours << '\n';
        std::cerr << label << " done after " << seconds_since(t0) << " s\n";
    }
    write_file(out / "metrics.csv", emit_report(table, ReportFormat::csv));
    write_file(out / "metrics.json", emit_report(table, ReportFormat::json));
    write_file(out / "metrics.md", emit_report(table, ReportFormat::md));
    write_file(out / "paths.csv", paths_csv.str());
    for (const char* f : {"metrics.csv", "metrics.json", "metrics.md", "paths.csv"}) m.output(f);
    std::cout << emit_report(table, ReportFormat::md);
    m.write(out, seconds_since(t0));
    return 0;
}

int cmd_report(const std::string& in, const std::string& format, const fs::path& out) {
    const std::string text = read_file(in);
    const MetricsTable t = fs::path(in).extension() == ".json" ? metrics_from_json(text) : metrics_from_csv(text);
    const std::string rendered = emit_report(t, parse_report_format(format));
    write_file(out / ("report." + format), rendered);
    std::cout << rendered;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Extraboard and overtime dispatch: generation, training, simulation and a live dispatch service"};
    app.require_subcommand(1);
    std::string config_path, out_dir = "run";
    std::uint64_t seed = 1;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "Run configuration (JSON)");
        sub->add_option("--seed", seed, "Seed for generation, loss training and sample paths");
        sub->add_option("--out", out_dir, "Run directory");
    };
    auto* gen = app.add_subcommand("gen", "Generate a schedule and its roster variants");
    auto* train = app.add_subcommand("train", "Train value and loss tables for each roster");
    auto* sim = app.add_subcommand("simulate", "Evaluate policies over common sample paths");
    auto* rep = app.add_subcommand("report", "Render a metrics table as csv, json or md");
    auto* srv = app.add_subcommand("serve", "Run the dispatch HTTP service");
    for (auto* s : {gen, train, sim, rep, srv}) add_common(s);
    std::string report_in, report_format = "md";
    rep->add_option("--in", report_in, "metrics.csv or metrics.json")->required();
    rep->add_option("--format", report_format, "csv, json or md");
    std::string host = "127.0.0.1";
    int port = 8080;
    srv->add_option("--host", host, "Bind address");
    srv->add_option("--port", port, "Port");
    CLI11_PARSE(app, argc, argv);

    try {
        const RunConfig cfg = load_config(config_path);
        if (*srv) {
            DispatchService service(ServiceOptions{train_options(cfg, seed)});
            std::cerr << "listening on " << host << ":" << port << "\n";
            serve(service, host, port);
            return 0;
        }
        fs::create_directories(out_dir);
        if (*gen) return cmd_gen(cfg, seed, out_dir, config_path);
        if (*train) return cmd_train(cfg, seed, out_dir, config_path);
        if (*sim) return cmd_simulate(cfg, seed, out_dir, config_path);
        if (*rep) return cmd_report(report_in, report_format, out_dir);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        for (const auto& v : e.violations()) std::cerr << "  " << v << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
