#include "mcpower/report.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace mcpower {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

} // namespace

std::string to_json(const FinalReport& report) {
    ordered_json j;
    j["schema_version"] = FinalReport::kSchemaVersion;
    j["alpha"] = report.alpha;
    j["gamma"] = report.gamma;
    j["epsilon"] = report.epsilon;
    j["spending_half_life"] = report.spending_half_life;
    j["rule"] = report.rule;
    j["sampler"] = report.sampler;
    j["seed"] = report.seed;
    j["streams"] = report.n_streams;

    if (report.pilot) {
        const auto& p = *report.pilot;
        j["pilot"] = {{"n", p.n},
                      {"t_max", p.t_max},
                      {"gamma", p.gamma_pilot},
                      {"positives", p.positives},
                      {"negatives", p.negatives},
                      {"unresolved", p.unresolved},
                      {"low", p.interval.low},
                      {"high", p.interval.high},
                      {"beta_hat", p.beta_hat},
                      {"survival_at_tmax", p.survival_at_tmax},
                      {"effort", p.effort}};
    } else {
        j["pilot"] = nullptr;
    }

    if (report.plan) {
        j["plan"] = {{"n_blind", report.plan->n_blind},
                     {"n_pilot", report.plan->n_pilot},
                     {"n_opt", report.plan->n_opt},
                     {"opt_fallback", report.plan->opt_fallback}};
    } else {
        j["plan"] = nullptr;
    }

    if (report.joint) {
        j["joint"] = {{"gamma", report.joint->schedule.gamma_joint},
                      {"eta", report.joint->eta},
                      {"stride", report.joint->schedule.checkpoint_stride},
                      {"horizon_constant", report.joint->schedule.horizon_constant}};
    } else {
        j["joint"] = nullptr;
    }

    const RunResult& r = report.run;
    ordered_json res;
    res["low"] = r.interval.low;
    res["high"] = r.interval.high;
    res["length"] = r.interval.length();
    res["positives"] = r.positives;
    res["negatives"] = r.negatives;
    res["unresolved"] = r.unresolved;
    res["joint_r"] = r.joint_r;
    res["joint_a"] = r.joint_a;
    if (r.positives + r.negatives > 0) {
        // descriptive only; the guarantee belongs to the interval
        res["point_estimate"] = static_cast<double>(r.positives) /
                                static_cast<double>(r.positives + r.negatives);
    } else {
        res["point_estimate"] = nullptr;
    }
    res["steps"] = r.steps;
    res["effort"] = r.effort;
    res["stopped_by"] = to_string(r.reason);
    res["truncated"] = r.reason == StopReason::effort_ceiling;
    res["empty_intersection"] = r.empty_intersection;
    if (!r.error.empty()) res["error"] = r.error;
    j["result"] = res;

    return j.dump(2);
}

std::string summarize(const FinalReport& report) {
    std::ostringstream os;
    const RunResult& r = report.run;
    char buf[256];
    std::snprintf(buf, sizeof buf, "interval   [%.6f, %.6f]  length %.6f\n",
                  r.interval.low, r.interval.high, r.interval.length());
    os << buf;
    if (r.positives + r.negatives > 0) {
        std::snprintf(buf, sizeof buf,
                      "point est  %.6f  (share of resolved streams; no guarantee "
                      "attached, only the interval has one)\n",
                      static_cast<double>(r.positives) /
                          static_cast<double>(r.positives + r.negatives));
        os << buf;
    }
    std::snprintf(buf, sizeof buf,
                  "resolved   %lld positive / %lld negative / %lld unresolved\n",
                  static_cast<long long>(r.positives), static_cast<long long>(r.negatives),
                  static_cast<long long>(r.unresolved));
    os << buf;
    if (r.joint_r > 0 || r.joint_a > 0) {
        std::snprintf(buf, sizeof buf,
                      "joint test credited %lld positive / %lld negative outcomes\n",
                      static_cast<long long>(r.joint_r), static_cast<long long>(r.joint_a));
        os << buf;
    }
    std::snprintf(buf, sizeof buf, "effort     %llu samples over %lld steps\n",
                  static_cast<unsigned long long>(r.effort),
                  static_cast<long long>(r.steps));
    os << buf;
    os << "stopped by " << to_string(r.reason) << "\n";
    if (r.empty_intersection)
        os << "warning: pilot and main intervals were disjoint (joint-error event); "
              "reported a zero-length interval\n";
    return os.str();
}

void write_events_csv(std::ostream& os, const std::vector<EventRow>& rows) {
    os << "t,positives,negatives,unresolved,low,high,effort\n";
    for (const auto& e : rows)
        os << e.t << ',' << e.positives << ',' << e.negatives << ',' << e.unresolved
           << ',' << fmt_double(e.low) << ',' << fmt_double(e.high) << ',' << e.effort
           << '\n';
}

std::vector<EventRow> parse_events_csv(std::istream& is) {
    std::vector<EventRow> out;
    std::string line;
    bool header = true;
    while (std::getline(is, line)) {
        if (header) { header = false; continue; }
        if (line.empty()) continue;
        long long t = 0, pos = 0, neg = 0, unres = 0;
        unsigned long long eff = 0;
        EventRow e;
        if (std::sscanf(line.c_str(), "%lld,%lld,%lld,%lld,%lf,%lf,%llu", &t, &pos,
                        &neg, &unres, &e.low, &e.high, &eff) != 7)
            throw std::runtime_error("events csv: malformed row: " + line);
        e.t = t;
        e.positives = pos;
        e.negatives = neg;
        e.unresolved = unres;
        e.effort = eff;
        out.push_back(e);
    }
    return out;
}

void write_joint_csv(std::ostream& os, const std::vector<JointRow>& rows) {
    os << "t,unresolved,r,a,t_plus,t_minus,xi,feasible,rejected\n";
    for (const auto& r : rows)
        os << r.t << ',' << r.unresolved << ',' << r.r << ',' << r.a << ',' << r.t_plus
           << ',' << r.t_minus << ',' << fmt_double(r.xi) << ',' << (r.feasible ? 1 : 0)
           << ',' << (r.rejected ? 1 : 0) << '\n';
}

std::vector<JointRow> parse_joint_csv(std::istream& is) {
    std::vector<JointRow> out;
    std::string line;
    bool header = true;
    while (std::getline(is, line)) {
        if (header) { header = false; continue; }
        if (line.empty()) continue;
        long long t = 0, u = 0, cr = 0, ca = 0, tp = 0, tm = 0;
        int feas = 0, rej = 0;
        JointRow r;
        if (std::sscanf(line.c_str(), "%lld,%lld,%lld,%lld,%lld,%lld,%lf,%d,%d", &t,
                        &u, &cr, &ca, &tp, &tm, &r.xi, &feas, &rej) != 9)
            throw std::runtime_error("joint csv: malformed row: " + line);
        r.t = t;
        r.unresolved = u;
        r.r = cr;
        r.a = ca;
        r.t_plus = tp;
        r.t_minus = tm;
        r.feasible = feas != 0;
        r.rejected = rej != 0;
        out.push_back(r);
    }
    return out;
}

void write_boundaries_csv(std::ostream& os, const BoundaryTable& table,
                          std::int64_t t_max) {
    const auto& sched = table.schedule();
    const double lambda = sched.reported_lambda();
    const double q = sched.reported_q();
    os << "t,lower,upper,spent_lower,spent_upper,envelope_lower,envelope_upper\n";
    for (std::int64_t t = 1; t <= t_max; ++t) {
        os << t << ',' << table.lower(t) << ',' << table.upper(t) << ','
           << fmt_double(table.spent_lower_at(t)) << ','
           << fmt_double(table.spent_upper_at(t));
        const EnvelopeBounds env = envelope_bounds(table.alpha(), lambda, q, t);
        os << ',' << env.lower << ',' << env.upper << '\n';
    }
}

std::string checkpoint_json(const FinalReport& report) {
    ordered_json j;
    j["schema_version"] = FinalReport::kSchemaVersion;
    j["kind"] = "checkpoint";
    j["alpha"] = report.alpha;
    j["gamma"] = report.gamma;
    j["epsilon"] = report.epsilon;
    j["spending_half_life"] = report.spending_half_life;
    j["rule"] = report.rule;
    j["sampler"] = report.sampler;
    j["seed"] = report.seed;
    j["streams"] = report.n_streams;
    j["t"] = report.run.steps;
    j["positives"] = report.run.positives;
    j["negatives"] = report.run.negatives;
    j["effort"] = report.run.effort;
    ordered_json st = ordered_json::array();
    for (const auto& s : report.run.streams)
        st.push_back({{"sum", s.sum},
                      {"steps", s.steps},
                      {"status", static_cast<int>(s.status)}});
    j["stream_states"] = st;
    return j.dump(2);
}

bool parse_checkpoint_streams(std::istream& is, std::vector<StreamState>& out,
                              std::int64_t& t, std::string& sampler,
                              std::uint64_t& seed) {
    ordered_json j;
    try {
        is >> j;
    } catch (...) {
        return false;
    }
    if (!j.contains("kind") || j["kind"] != "checkpoint") return false;
    t = j["t"].get<std::int64_t>();
    sampler = j["sampler"].get<std::string>();
    seed = j["seed"].get<std::uint64_t>();
    out.clear();
    for (const auto& s : j["stream_states"]) {
        StreamState st;
        st.sum = s["sum"].get<std::int64_t>();
        st.steps = s["steps"].get<std::int64_t>();
        st.status = static_cast<StreamStatus>(s["status"].get<int>());
        out.push_back(st);
    }
    return true;
}

} // namespace mcpower
