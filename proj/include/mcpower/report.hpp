// Run reports and logs: a versioned JSON report, CSV event/joint logs
// that round-trip through the bundled parsers, and the boundaries CSV.
// Serialization is byte-deterministic for identical inputs.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mcpower/boundary.hpp"
#include "mcpower/engine.hpp"
#include "mcpower/pilot_planner.hpp"

namespace mcpower {

struct PlanNumbers {
    std::int64_t n_blind = 0;
    std::int64_t n_pilot = 0;
    std::int64_t n_opt = 0;
    bool opt_fallback = false;
};

struct FinalReport {
    static constexpr int kSchemaVersion = 1;

    double alpha = 0.05;
    double gamma = 0.01;
    double epsilon = 1e-4;
    std::int64_t spending_half_life = 1000;
    std::string rule;
    std::string sampler;
    std::uint64_t seed = 1;
    std::int64_t n_streams = 0;

    std::optional<PilotSummary> pilot;
    std::optional<PlanNumbers> plan;
    std::optional<JointTestConfig> joint;

    RunResult run;
};

// Stable-format JSON (sorted keys, round-trip doubles).
std::string to_json(const FinalReport& report);

// Human-readable console summary.
std::string summarize(const FinalReport& report);

void write_events_csv(std::ostream& os, const std::vector<EventRow>& rows);
std::vector<EventRow> parse_events_csv(std::istream& is);

void write_joint_csv(std::ostream& os, const std::vector<JointRow>& rows);
std::vector<JointRow> parse_joint_csv(std::istream& is);

// t, L_t, U_t, cumulative spent mass, and the envelope evaluated with the
// schedule-reported (lambda, q) where defined.
void write_boundaries_csv(std::ostream& os, const BoundaryTable& table,
                          std::int64_t t_max);

// Checkpoint of a failed/truncated run, enough to resume builtin-sampler
// runs bit-exactly.
std::string checkpoint_json(const FinalReport& report);
bool parse_checkpoint_streams(std::istream& is, std::vector<StreamState>& out,
                              std::int64_t& t, std::string& sampler,
                              std::uint64_t& seed);

} // namespace mcpower
