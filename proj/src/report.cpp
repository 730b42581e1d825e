#include "xbadp/report.hpp"

#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "xbadp/errors.hpp"

namespace xbadp {

namespace {

const char* const kHeader =
    "policy,n_xb,p_scale,n_paths,mean,sd,cv,gap,covered_hours,uncovered_hours,uncovered_pct,utilization,"
    "solves,slow_solve_frac,max_solve_ms,deadline_hits";

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string fixed(double x, int digits) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*f", digits, x);
    return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double to_double(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError("metrics csv: bad number in " + what + ": '" + s + "'");
    }
}

}  // namespace

ReportFormat parse_report_format(const std::string& s) {
    if (s == "csv") return ReportFormat::csv;
    if (s == "json") return ReportFormat::json;
    if (s == "md") return ReportFormat::md;
    throw ParseError("unknown report format: " + s);
}

std::string emit_report(const MetricsTable& m, ReportFormat format) {
    std::ostringstream os;
    switch (format) {
        case ReportFormat::csv:
            os << kHeader << '\n';
            for (const auto& r : m.rows) {
                os << to_string(r.policy) << ',' << r.n_xb << ',' << num(r.p_scale) << ',' << r.n_paths << ','
                   << num(r.mean) << ',' << num(r.sd) << ',' << num(r.cv) << ',' << (r.gap ? num(*r.gap) : "") << ','
                   << num(r.covered_hours) << ',' << num(r.uncovered_hours) << ',' << num(r.uncovered_pct) << ','
                   << num(r.utilization) << ',' << r.solves << ',' << num(r.slow_solve_frac) << ','
                   << num(r.max_solve_ms) << ',' << r.deadline_hits << '\n';
            }
            break;
        case ReportFormat::json: {
            auto rows = nlohmann::json::array();
            for (const auto& r : m.rows) {
                rows.push_back({{"policy", to_string(r.policy)}, {"n_xb", r.n_xb}, {"p_scale", r.p_scale},
                                {"n_paths", r.n_paths}, {"mean", r.mean}, {"sd", r.sd}, {"cv", r.cv},
                                {"gap", r.gap ? nlohmann::json(*r.gap) : nlohmann::json(nullptr)},
                                {"covered_hours", r.covered_hours}, {"uncovered_hours", r.uncovered_hours},
                                {"uncovered_pct", r.uncovered_pct}, {"utilization", r.utilization},
                                {"solves", r.solves}, {"slow_solve_frac", r.slow_solve_frac},
                                {"max_solve_ms", r.max_solve_ms}, {"deadline_hits", r.deadline_hits}});
            }
            os << nlohmann::json{{"rows", rows}}.dump(2) << '\n';
            break;
        }
        case ReportFormat::md:
            os << "| Policy | N_XB | p scale | Mean | SD | CV | [Gap %] | Uncovered h | Uncovered % | Utilization |\n";
            os << "|---|---:|---:|---:|---:|---:|---:|---:|---:|---:|\n";
            for (const auto& r : m.rows) {
                os << "| " << to_string(r.policy) << " | " << r.n_xb << " | " << fixed(r.p_scale, 2) << " | "
                   << fixed(r.mean, 2) << " | " << fixed(r.sd, 2) << " | " << fixed(r.cv, 3) << " | "
                   << (r.gap ? "[" + fixed(100.0 * *r.gap, 2) + "]" : std::string("")) << " | "
                   << fixed(r.uncovered_hours, 2) << " | " << fixed(r.uncovered_pct, 2) << " | "
                   << fixed(r.utilization, 3) << " |\n";
            }
            break;
    }
    return os.str();
}

MetricsTable metrics_from_csv(const std::string& csv) {
    std::istringstream is(csv);
    std::string line;
    if (!std::getline(is, line) || split(line, ',') != split(kHeader, ','))
        throw ParseError("metrics csv: unexpected header");
    MetricsTable m;
    int line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto f = split(line, ',');
        if (f.size() != 16) throw ParseError("metrics csv: line " + std::to_string(line_no) + " has " + std::to_string(f.size()) + " fields");
        const std::string at = "line " + std::to_string(line_no);
        PolicySummary r;
        r.policy = parse_policy(f[0]);
        r.n_xb = static_cast<int>(to_double(f[1], at));
        r.p_scale = to_double(f[2], at);
        r.n_paths = static_cast<int>(to_double(f[3], at));
        r.mean = to_double(f[4], at);
        r.sd = to_double(f[5], at);
        r.cv = to_double(f[6], at);
        if (!f[7].empty()) r.gap = to_double(f[7], at);
        r.covered_hours = to_double(f[8], at);
        r.uncovered_hours = to_double(f[9], at);
        r.uncovered_pct = to_double(f[10], at);
        r.utilization = to_double(f[11], at);
        r.solves = static_cast<long long>(to_double(f[12], at));
        r.slow_solve_frac = to_double(f[13], at);
        r.max_solve_ms = to_double(f[14], at);
        r.deadline_hits = static_cast<int>(to_double(f[15], at));
        m.rows.push_back(r);
    }
    return m;
}

MetricsTable metrics_from_json(const std::string& text) {
    MetricsTable m;
    try {
        auto j = nlohmann::json::parse(text);
        for (const auto& x : j.at("rows")) {
            PolicySummary r;
            r.policy = parse_policy(x.at("policy").get<std::string>());
            r.n_xb = x.at("n_xb").get<int>();
            r.p_scale = x.at("p_scale").get<double>();
            r.n_paths = x.at("n_paths").get<int>();
            r.mean = x.at("mean").get<double>();
            r.sd = x.at("sd").get<double>();
            r.cv = x.at("cv").get<double>();
            if (!x.at("gap").is_null()) r.gap = x.at("gap").get<double>();
            r.covered_hours = x.at("covered_hours").get<double>();
            r.uncovered_hours = x.at("uncovered_hours").get<double>();
            r.uncovered_pct = x.at("uncovered_pct").get<double>();
            r.utilization = x.at("utilization").get<double>();
            r.solves = x.at("solves").get<long long>();
            r.slow_solve_frac = x.at("slow_solve_frac").get<double>();
            r.max_solve_ms = x.at("max_solve_ms").get<double>();
            r.deadline_hits = x.at("deadline_hits").get<int>();
            m.rows.push_back(r);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("metrics json: ") + e.what());
    }
    return m;
}

}  // namespace xbadp
