#include "mcpower/engine.hpp"

#include <algorithm>
#include <memory>
#include <stdexcept>
#include <thread>

namespace mcpower {

const char* to_string(StopReason r) {
    switch (r) {
    case StopReason::rule_admitted: return "rule_admitted";
    case StopReason::joint_test: return "joint_test";
    case StopReason::max_steps: return "max_steps";
    case StopReason::effort_ceiling: return "effort_ceiling";
    case StopReason::exhausted: return "exhausted";
    case StopReason::sampler_failure: return "sampler_failure";
    }
    return "?";
}

namespace {

struct Slot {
    std::uint64_t id = 0;
    StreamState st;
};

struct Event {
    std::int64_t tau = 0;
    std::uint64_t id = 0;
    StreamStatus outcome = StreamStatus::unresolved;
};

class Runner {
public:
    Runner(const EngineConfig& cfg, StreamSource& source, BoundaryTable& table)
        : cfg_(cfg), source_(source), table_(table),
          cache_(cfg.n_streams, cfg.gamma) {
        if (cfg_.n_streams < 1) throw std::invalid_argument("engine: need at least one stream");
        if (!(cfg_.gamma > 0.0 && cfg_.gamma < 1.0))
            throw std::invalid_argument("engine: gamma must be in (0,1)");
        if (cfg_.joint) cfg_.joint->schedule.validate();
        if (!cfg_.initial_streams.empty()) {
            if (static_cast<std::int64_t>(cfg_.initial_streams.size()) != cfg_.n_streams)
                throw std::invalid_argument("engine: checkpoint stream count mismatch");
            streams_ = cfg_.initial_streams;
        } else {
            streams_.assign(static_cast<std::size_t>(cfg_.n_streams), StreamState{});
        }
        for (std::size_t i = 0; i < streams_.size(); ++i) {
            const auto& st = streams_[i];
            if (st.status == StreamStatus::unresolved) {
                alive_.push_back(i);
                t_init_ = std::max(t_init_, st.steps);
            } else {
                if (st.status == StreamStatus::positive) ++R_; else ++A_;
                sum_tau_resolved_ += static_cast<std::uint64_t>(st.steps);
                t_init_ = std::max(t_init_, st.steps);
            }
        }
    }

    RunResult run() {
        current_ = compute_interval(R_, A_, cfg_.n_streams - R_ - A_);
        log_event(t_init_);
        if (cfg_.rule.admits(current_)) {
            finalize(t_init_, StopReason::rule_admitted);
            return std::move(result_);
        }

        std::int64_t t = t_init_;
        while (true) {
            if (cfg_.max_steps > 0 && t >= cfg_.max_steps) {
                finalize(t, StopReason::max_steps);
                break;
            }
            const std::uint64_t alive_n = alive_.size();
            if (alive_n == 0) {
                // Every stream resolved and the rule never admitted: the
                // interval cannot improve further. Report it at the last
                // resolution time.
                std::int64_t last = 0;
                for (const auto& st : streams_) last = std::max(last, st.steps);
                finalize(last, StopReason::exhausted);
                break;
            }
            const std::uint64_t effort_now = effort_at(t);
            if (effort_now >= cfg_.max_effort) {
                finalize(t, StopReason::effort_ceiling);
                break;
            }
            const std::uint64_t room = (cfg_.max_effort - effort_now) / alive_n;
            if (room == 0) {
                finalize(t, StopReason::effort_ceiling);
                break;
            }

            std::int64_t t1 = t + std::min<std::int64_t>(
                std::max<std::int64_t>(64, t), 1 << 19);
            if (cfg_.joint) {
                const std::int64_t stride = cfg_.joint->schedule.checkpoint_stride;
                const std::int64_t next_cp = (t / stride + 1) * stride;
                t1 = std::min(t1, next_cp);
            }
            if (cfg_.max_steps > 0) t1 = std::min(t1, cfg_.max_steps);
            t1 = std::min(t1, t + static_cast<std::int64_t>(
                                    std::min<std::uint64_t>(room, 1u << 30)));

            const bool cp_here = cfg_.joint && cfg_.joint->schedule.is_checkpoint(t1);
            if (cp_here && table_.extended_to() < t1 && !table_.has_alive_dist(t1))
                table_.retain_at(t1);
            table_.extend_to(t1);

            advance_block(t1);
            if (failed_) {
                commit_all();
                finalize_failure(t);
                break;
            }

            std::sort(events_.begin(), events_.end(), [](const Event& x, const Event& y) {
                return x.tau != y.tau ? x.tau < y.tau : x.id < y.id;
            });

            const std::int64_t t_stop = replay_events(t1, cp_here);
            if (t_stop >= 0) {
                settle_at(t_stop);
                break;
            }
            commit_all();
            t = t1;
        }
        return std::move(result_);
    }

private:
    Interval compute_interval(std::int64_t R, std::int64_t A, std::int64_t u) {
        Interval iv = cache_.union_interval(R, A, u, cfg_.epsilon);
        if (cfg_.pilot_interval) {
            const IntersectResult x = intersect_with_pilot(iv, *cfg_.pilot_interval);
            if (x.empty) result_.empty_intersection = true;
            return x.box;
        }
        return iv;
    }

    std::uint64_t effort_at(std::int64_t t) const {
        return cfg_.prior_effort + sum_tau_resolved_ +
               static_cast<std::uint64_t>(alive_.size()) * static_cast<std::uint64_t>(t);
    }

    void log_event(std::int64_t t) {
        result_.events.push_back({t, R_, A_,
                                  cfg_.n_streams - R_ - A_,
                                  current_.low, current_.high, effort_at(t)});
    }

    void advance_block(std::int64_t t1) {
        const auto L = table_.lower_seq();
        const auto U = table_.upper_seq();
        working_.clear();
        working_.reserve(alive_.size());
        for (const std::size_t idx : alive_)
            working_.push_back({static_cast<std::uint64_t>(idx), streams_[idx]});
        events_.clear();

        const int shards = source_.required_shards();
        int workers = std::max(1, cfg_.workers);
        if (shards > 0) workers = shards;

        auto work = [&](std::size_t begin, std::size_t end, std::vector<Event>& evs,
                        std::string& err, std::uint64_t shard) {
            try {
                for (std::size_t k = begin; k < end; ++k) {
                    Slot& slot = working_[k];
                    if (shards > 0 && source_.shard_of(slot.id) != shard) continue;
                    source_.advance(slot.id, slot.st, L, U, t1);
                    if (slot.st.status != StreamStatus::unresolved)
                        evs.push_back({slot.st.steps, slot.id, slot.st.status});
                }
            } catch (const SamplerError& e) {
                err = e.what();
            }
        };

        if (workers <= 1 || working_.size() < 2) {
            std::string err;
            work(0, working_.size(), events_, err, 0);
            if (!err.empty()) { failed_ = true; fail_msg_ = err; }
        } else {
            std::vector<std::vector<Event>> evs(static_cast<std::size_t>(workers));
            std::vector<std::string> errs(static_cast<std::size_t>(workers));
            std::vector<std::thread> pool;
            for (int w = 0; w < workers; ++w) {
                std::size_t begin = 0, end = working_.size();
                if (shards == 0) {
                    const std::size_t per = (working_.size() + workers - 1) / workers;
                    begin = std::min(working_.size(), static_cast<std::size_t>(w) * per);
                    end = std::min(working_.size(), begin + per);
                }
                pool.emplace_back(work, begin, end, std::ref(evs[static_cast<std::size_t>(w)]),
                                  std::ref(errs[static_cast<std::size_t>(w)]),
                                  static_cast<std::uint64_t>(w));
            }
            for (auto& th : pool) th.join();
            for (int w = 0; w < workers; ++w) {
                auto& chunk = evs[static_cast<std::size_t>(w)];
                events_.insert(events_.end(), chunk.begin(), chunk.end());
                if (!errs[static_cast<std::size_t>(w)].empty() && !failed_) {
                    failed_ = true;
                    fail_msg_ = errs[static_cast<std::size_t>(w)];
                }
            }
        }
    }

    // Walk resolution events in time order; returns the stop time, or -1
    // to continue. Counts R_/A_ and the logged rows advance as a side
    // effect up to the stop (or through the whole block).
    std::int64_t replay_events(std::int64_t t1, bool checkpoint_here) {
        std::size_t i = 0;
        while (i < events_.size()) {
            const std::int64_t tau = events_[i].tau;
            while (i < events_.size() && events_[i].tau == tau) {
                if (events_[i].outcome == StreamStatus::positive) ++R_; else ++A_;
                sum_tau_resolved_ += static_cast<std::uint64_t>(tau);
                ++i;
            }
            const std::int64_t u = cfg_.n_streams - R_ - A_;
            current_ = compute_interval(R_, A_, u);
            log_event_at(tau, u);
            if (cfg_.rule.admits(current_)) {
                stop_reason_ = StopReason::rule_admitted;
                return tau;
            }
        }

        if (checkpoint_here && cfg_.n_streams - R_ - A_ > 0) {
            const std::int64_t stop = joint_checkpoint(t1);
            if (stop >= 0) return stop;
        }
        return -1;
    }

    void log_event_at(std::int64_t t, std::int64_t u) {
        result_.events.push_back({t, R_, A_, u, current_.low, current_.high,
                                  cfg_.prior_effort + sum_tau_resolved_ +
                                      static_cast<std::uint64_t>(u) *
                                          static_cast<std::uint64_t>(t)});
    }

    std::int64_t joint_checkpoint(std::int64_t t1) {
        const auto& sched = cfg_.joint->schedule;
        if (sched.gamma_joint <= 0.0) return -1;
        const std::int64_t cp_index = t1 / sched.checkpoint_stride;
        const double xi = sched.xi_at_checkpoint(cp_index);
        if (!(xi > 0.0)) return -1;

        const std::int64_t u = cfg_.n_streams - R_ - A_;
        JointRow row;
        row.t = t1;
        row.unresolved = u;
        row.xi = xi;

        const RaChoice ra = choose_ra(cache_, R_, A_, u, cfg_.epsilon,
                                      cfg_.pilot_interval, cfg_.rule);
        row.feasible = ra.feasible;
        if (ra.feasible && ra.r + ra.a > 0) {
            row.r = ra.r;
            row.a = ra.a;
            std::vector<std::int64_t> sums;
            sums.reserve(static_cast<std::size_t>(u));
            for (const Slot& slot : working_)
                if (slot.st.status == StreamStatus::unresolved)
                    sums.push_back(slot.st.sum);
            std::sort(sums.begin(), sums.end());

            // A shared table may have been extended past this checkpoint
            // before the run started (e.g. by the pilot); rebuild the
            // conditional law at t1 from scratch in that case. Construction
            // is deterministic, so the boundaries agree.
            const BoundaryTable* g_table = &table_;
            std::unique_ptr<BoundaryTable> scratch;
            if (!table_.has_alive_dist(t1)) {
                scratch = std::make_unique<BoundaryTable>(table_.alpha(),
                                                          table_.schedule());
                scratch->extend_to(t1);
                g_table = scratch.get();
            }
            const JointStatistics st = test_statistics(sums, *g_table, t1, ra.r, ra.a,
                                                       cfg_.joint->eta);
            row.t_plus = st.t_plus;
            row.t_minus = st.t_minus;
            const JointDecision d = decide(st.t_plus, st.t_minus, u, ra.r, ra.a,
                                           cfg_.joint->eta, xi);
            row.rejected = d.both();
            result_.joint_log.push_back(row);
            if (d.both()) {
                result_.joint_r = ra.r;
                result_.joint_a = ra.a;
                current_ = compute_interval(R_ + ra.r, A_ + ra.a, u - ra.r - ra.a);
                stop_reason_ = StopReason::joint_test;
                return t1;
            }
            return -1;
        }
        result_.joint_log.push_back(row);
        return -1;
    }

    void commit_all() {
        for (const Slot& slot : working_) streams_[slot.id] = slot.st;
        alive_.clear();
        for (const Slot& slot : working_)
            if (slot.st.status == StreamStatus::unresolved)
                alive_.push_back(slot.id);
    }

    // Stop mid-block at t_stop. Counter-based sources are re-advanced
    // from the committed states so every stream's record is its true
    // state at t_stop; consumed-bit sources (external children) keep the
    // materialized sums and only resolutions past t_stop are reverted.
    void settle_at(std::int64_t t_stop) {
        if (source_.replayable()) {
            const auto L = table_.lower_seq();
            const auto U = table_.upper_seq();
            for (Slot& slot : working_) {
                slot.st = streams_[slot.id];
                source_.advance(slot.id, slot.st, L, U, t_stop);
                streams_[slot.id] = slot.st;
            }
        } else {
            for (const Slot& slot : working_) {
                StreamState st = slot.st;
                if (st.status != StreamStatus::unresolved && st.steps > t_stop)
                    st.status = StreamStatus::unresolved;
                st.steps = std::min(st.steps, t_stop);
                streams_[slot.id] = st;
            }
        }
        // Recompute counts over all streams (earlier blocks already
        // committed their resolutions into streams_).
        R_ = 0;
        A_ = 0;
        sum_tau_resolved_ = 0;
        for (auto& st : streams_) {
            if (st.status == StreamStatus::positive) {
                ++R_;
                sum_tau_resolved_ += static_cast<std::uint64_t>(st.steps);
            } else if (st.status == StreamStatus::negative) {
                ++A_;
                sum_tau_resolved_ += static_cast<std::uint64_t>(st.steps);
            }
        }
        finalize(t_stop, stop_reason_);
    }

    void finalize(std::int64_t t, StopReason reason) {
        result_.reason = reason;
        result_.positives = R_;
        result_.negatives = A_;
        result_.unresolved = cfg_.n_streams - R_ - A_;
        result_.steps = t;
        if (reason != StopReason::joint_test)
            current_ = compute_interval(R_, A_, result_.unresolved);
        result_.interval = current_;
        std::uint64_t effort = cfg_.prior_effort;
        for (auto& st : streams_) {
            st.steps = std::min(st.steps, t);
            effort += static_cast<std::uint64_t>(st.steps);
        }
        result_.effort = effort;
        result_.streams = streams_;
    }

    void finalize_failure(std::int64_t t0) {
        // Streams carry their own last materialized step; the run-level
        // step count is the last completed common step.
        result_.error = fail_msg_;
        R_ = 0;
        A_ = 0;
        sum_tau_resolved_ = 0;
        std::int64_t common = 0;
        bool first = true;
        for (const auto& st : streams_) {
            if (st.status == StreamStatus::positive) {
                ++R_;
                sum_tau_resolved_ += static_cast<std::uint64_t>(st.steps);
            } else if (st.status == StreamStatus::negative) {
                ++A_;
                sum_tau_resolved_ += static_cast<std::uint64_t>(st.steps);
            } else {
                common = first ? st.steps : std::min(common, st.steps);
                first = false;
            }
        }
        if (first) common = t0;
        result_.reason = StopReason::sampler_failure;
        result_.positives = R_;
        result_.negatives = A_;
        result_.unresolved = cfg_.n_streams - R_ - A_;
        result_.steps = common;
        current_ = compute_interval(R_, A_, result_.unresolved);
        result_.interval = current_;
        std::uint64_t effort = cfg_.prior_effort;
        for (const auto& st : streams_) effort += static_cast<std::uint64_t>(st.steps);
        result_.effort = effort;
        result_.streams = streams_;
    }

    EngineConfig cfg_;
    StreamSource& source_;
    BoundaryTable& table_;
    CpCache cache_;

    std::vector<StreamState> streams_;
    std::vector<std::size_t> alive_;
    std::vector<Slot> working_;
    std::vector<Event> events_;

    std::int64_t R_ = 0, A_ = 0;
    std::int64_t t_init_ = 0;
    std::uint64_t sum_tau_resolved_ = 0;
    Interval current_;
    StopReason stop_reason_ = StopReason::rule_admitted;
    bool failed_ = false;
    std::string fail_msg_;
    RunResult result_;
};

} // namespace

RunResult run_streams(const EngineConfig& cfg, StreamSource& source,
                      BoundaryTable& table) {
    Runner r(cfg, source, table);
    return r.run();
}

double naive_estimate(StreamSource& source, std::int64_t n, std::int64_t m,
                      double alpha) {
    if (n < 1 || m < 1) throw std::invalid_argument("naive_estimate: N, M must be >= 1");
    std::int64_t hits = 0;
    for (std::int64_t i = 0; i < n; ++i) {
        const std::int64_t s = source.bit_sum(static_cast<std::uint64_t>(i), m);
        if (static_cast<double>(s) / static_cast<double>(m) <= alpha) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(n);
}

} // namespace mcpower
