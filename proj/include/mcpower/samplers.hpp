// Stream sources: each stream i carries an implicit p-value p_i and
// emits i.i.d. Bernoulli(p_i) bits (the resample-exceedance indicators
// of a Monte Carlo test). Built-in models cover Beta(1,x) p-values,
// degenerate and discrete p-values, and a two-sample Gaussian
// permutation test; external processes speak a line protocol.
#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mcpower/rng.hpp"

namespace mcpower {

enum class StreamStatus : std::uint8_t {
    unresolved = 0,
    positive = 1, // hit the lower boundary: p <= alpha
    negative = 2, // hit the upper boundary: p > alpha
};

struct StreamState {
    std::int64_t sum = 0;   // S_t
    std::int64_t steps = 0; // last completed step
    StreamStatus status = StreamStatus::unresolved;
};

struct SamplerSpec {
    enum class Kind { beta, fixed_p, discrete, permutation, external };

    Kind kind = Kind::beta;
    double beta_x = 1.0;
    double fixed_p = 0.5;
    std::vector<double> support;
    std::vector<double> weights;
    int perm_k = 4;
    int perm_l = 8;
    double effect = 1.0;
    double sigma = 1.0;
    std::string command;
    int external_procs = 1;
    double timeout_seconds = 60.0;

    void validate() const;
    std::string describe() const;

    // beta:x=23.47 | fixed:p=0.03 | discrete:p=...;...,w=...;... |
    // perm:K=4,L=8,effect=1.0[,sigma=1] | ext:cmd="..."
    static SamplerSpec parse(const std::string& text);
};

// x such that a Beta(1,x) p-value satisfies P[p <= alpha] = beta_target.
double beta_parameter_for_power(double alpha, double beta_target);

// Exact one-sided permutation p-value of a two-sample dataset (first k
// values are the treatment group) over all C(n, k) assignments.
// Enumeration is limited to n <= 16.
double exact_permutation_pvalue(std::span<const double> values, int k);

// Raised on external-source protocol failures; carries enough context to
// point at the offending stream and reply.
struct SamplerError : std::runtime_error {
    SamplerError(const std::string& msg, std::uint64_t stream_id)
        : std::runtime_error(msg), stream_id(stream_id) {}
    std::uint64_t stream_id = 0;
};

class StreamSource {
public:
    virtual ~StreamSource() = default;

    // Advance one stream from st.steps+1 through t1 or until it crosses a
    // boundary; st is updated in place. L and U are indexed by step.
    virtual void advance(std::uint64_t id, StreamState& st,
                         std::span<const std::int32_t> L,
                         std::span<const std::int32_t> U, std::int64_t t1) = 0;

    // Sum of the first m bits of a stream, no boundary checks.
    virtual std::int64_t bit_sum(std::uint64_t id, std::int64_t m) = 0;

    // Counter-based sources can re-derive any bit; consumed-bit sources
    // (external children) cannot.
    virtual bool replayable() const { return true; }

    // >0: streams must be partitioned into exactly this many shards, one
    // worker per shard (serialized children). 0: any partition works.
    virtual int required_shards() const { return 0; }
    virtual std::uint64_t shard_of(std::uint64_t /*id*/) const { return 0; }
};

class BuiltinSource : public StreamSource {
public:
    BuiltinSource(const SamplerSpec& spec, std::uint64_t seed,
                  rng::Domain data_domain, rng::Domain bit_domain,
                  std::uint64_t n_streams);

    void advance(std::uint64_t id, StreamState& st,
                 std::span<const std::int32_t> L,
                 std::span<const std::int32_t> U, std::int64_t t1) override;
    std::int64_t bit_sum(std::uint64_t id, std::int64_t m) override;

    bool bit(std::uint64_t id, std::int64_t step) const;

    // p_i for p-value kinds; the dataset's exact p-value for the
    // permutation kind (by enumeration; test use).
    double stream_p(std::uint64_t id) const;

    std::span<const double> dataset(std::uint64_t id) const;

private:
    bool perm_bit(std::uint64_t id, std::int64_t step) const;

    SamplerSpec spec_;
    std::uint64_t seed_;
    std::uint64_t data_tag_;
    std::uint64_t bit_tag_;
    std::vector<double> p_;             // per-stream p, p-value kinds
    std::vector<std::uint64_t> key_;    // per-stream bit keys
    std::vector<double> values_;        // per-stream datasets, permutation kind
    std::vector<double> obs_sum_;       // observed treatment-group sums
};

std::unique_ptr<StreamSource> make_source(const SamplerSpec& spec, std::uint64_t seed,
                                          rng::Domain data_domain,
                                          rng::Domain bit_domain,
                                          std::uint64_t n_streams);

} // namespace mcpower
