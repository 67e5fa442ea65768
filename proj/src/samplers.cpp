#include "mcpower/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "mcpower/external_source.hpp"

namespace mcpower {

void SamplerSpec::validate() const {
    switch (kind) {
    case Kind::beta:
        if (!(beta_x > 0.0)) throw std::invalid_argument("sampler beta: x must be > 0");
        break;
    case Kind::fixed_p:
        if (!(fixed_p >= 0.0 && fixed_p <= 1.0))
            throw std::invalid_argument("sampler fixed: p must be in [0,1]");
        break;
    case Kind::discrete: {
        if (support.empty() || support.size() != weights.size())
            throw std::invalid_argument("sampler discrete: support/weights mismatch");
        double total = 0.0;
        for (std::size_t i = 0; i < support.size(); ++i) {
            if (!(support[i] >= 0.0 && support[i] <= 1.0))
                throw std::invalid_argument("sampler discrete: support must be in [0,1]");
            if (!(weights[i] >= 0.0))
                throw std::invalid_argument("sampler discrete: weights must be >= 0");
            total += weights[i];
        }
        if (std::fabs(total - 1.0) > 1e-9)
            throw std::invalid_argument("sampler discrete: weights must sum to 1");
        break;
    }
    case Kind::permutation:
        if (perm_k < 1 || perm_l < 1)
            throw std::invalid_argument("sampler perm: K and L must be >= 1");
        if (!(sigma > 0.0)) throw std::invalid_argument("sampler perm: sigma must be > 0");
        break;
    case Kind::external:
        if (command.empty()) throw std::invalid_argument("sampler ext: empty command");
        if (external_procs < 1)
            throw std::invalid_argument("sampler ext: procs must be >= 1");
        if (!(timeout_seconds > 0.0))
            throw std::invalid_argument("sampler ext: timeout must be > 0");
        break;
    }
}

std::string SamplerSpec::describe() const {
    char buf[256];
    switch (kind) {
    case Kind::beta:
        std::snprintf(buf, sizeof buf, "beta:x=%g", beta_x);
        return buf;
    case Kind::fixed_p:
        std::snprintf(buf, sizeof buf, "fixed:p=%g", fixed_p);
        return buf;
    case Kind::discrete: {
        std::string s = "discrete:p=";
        for (std::size_t i = 0; i < support.size(); ++i) {
            if (i) s += ';';
            std::snprintf(buf, sizeof buf, "%g", support[i]);
            s += buf;
        }
        s += ",w=";
        for (std::size_t i = 0; i < weights.size(); ++i) {
            if (i) s += ';';
            std::snprintf(buf, sizeof buf, "%g", weights[i]);
            s += buf;
        }
        return s;
    }
    case Kind::permutation:
        std::snprintf(buf, sizeof buf, "perm:K=%d,L=%d,effect=%g,sigma=%g", perm_k,
                      perm_l, effect, sigma);
        return buf;
    case Kind::external:
        return "ext:cmd=\"" + command + "\"";
    }
    return "";
}

namespace {

std::vector<double> split_values(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ';')) out.push_back(std::stod(item));
    return out;
}

} // namespace

SamplerSpec SamplerSpec::parse(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos)
        throw std::invalid_argument("sampler: expected kind:args, got " + text);
    const std::string name = text.substr(0, colon);
    const std::string args = text.substr(colon + 1);

    SamplerSpec spec;
    if (name == "ext") {
        spec.kind = Kind::external;
        // cmd= consumes the rest of the string; optional quotes stripped
        const std::string key = "cmd=";
        const auto pos = args.find(key);
        if (pos == std::string::npos)
            throw std::invalid_argument("sampler ext: missing cmd=");
        std::string cmd = args.substr(pos + key.size());
        if (cmd.size() >= 2 && cmd.front() == '"' && cmd.back() == '"')
            cmd = cmd.substr(1, cmd.size() - 2);
        spec.command = cmd;
        std::string head = args.substr(0, pos);
        std::stringstream ss(head);
        std::string kv;
        while (std::getline(ss, kv, ',')) {
            if (kv.empty()) continue;
            const auto eq = kv.find('=');
            if (eq == std::string::npos) continue;
            const std::string k = kv.substr(0, eq);
            const std::string v = kv.substr(eq + 1);
            if (k == "procs") spec.external_procs = std::stoi(v);
            else if (k == "timeout") spec.timeout_seconds = std::stod(v);
            else throw std::invalid_argument("sampler ext: unknown key " + k);
        }
        spec.validate();
        return spec;
    }

    std::stringstream ss(args);
    std::string kv;
    std::string discrete_p, discrete_w;
    bool saw_any = false;
    while (std::getline(ss, kv, ',')) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("sampler: expected key=value, got " + kv);
        const std::string k = kv.substr(0, eq);
        const std::string v = kv.substr(eq + 1);
        saw_any = true;
        if (name == "beta" && k == "x") spec.beta_x = std::stod(v);
        else if (name == "fixed" && k == "p") spec.fixed_p = std::stod(v);
        else if (name == "perm" && (k == "K" || k == "k")) spec.perm_k = std::stoi(v);
        else if (name == "perm" && (k == "L" || k == "l")) spec.perm_l = std::stoi(v);
        else if (name == "perm" && k == "effect") spec.effect = std::stod(v);
        else if (name == "perm" && k == "sigma") spec.sigma = std::stod(v);
        else if (name == "discrete" && k == "p") discrete_p = v;
        else if (name == "discrete" && k == "w") discrete_w = v;
        else throw std::invalid_argument("sampler " + name + ": unknown key " + k);
    }
    if (!saw_any) throw std::invalid_argument("sampler " + name + ": missing parameters");

    if (name == "beta") spec.kind = Kind::beta;
    else if (name == "fixed") spec.kind = Kind::fixed_p;
    else if (name == "perm") spec.kind = Kind::permutation;
    else if (name == "discrete") {
        spec.kind = Kind::discrete;
        spec.support = split_values(discrete_p);
        spec.weights = split_values(discrete_w);
    } else {
        throw std::invalid_argument("unknown sampler kind: " + name);
    }
    spec.validate();
    return spec;
}

double beta_parameter_for_power(double alpha, double beta_target) {
    if (!(alpha > 0.0 && alpha < 1.0) || !(beta_target > 0.0 && beta_target < 1.0))
        throw std::invalid_argument("beta_parameter_for_power: arguments must be in (0,1)");
    return std::log1p(-beta_target) / std::log1p(-alpha);
}

double exact_permutation_pvalue(std::span<const double> values, int k) {
    const int n = static_cast<int>(values.size());
    if (n > 16) throw std::invalid_argument("exact_permutation_pvalue: n > 16");
    if (k < 1 || k >= n)
        throw std::invalid_argument("exact_permutation_pvalue: bad group size");

    double obs = 0.0;
    for (int i = 0; i < k; ++i) obs += values[static_cast<std::size_t>(i)];

    // Walk all k-subsets in lexicographic order; the mean-difference
    // statistic is monotone in the treatment-group sum at fixed total.
    std::vector<int> idx(static_cast<std::size_t>(k));
    std::iota(idx.begin(), idx.end(), 0);
    std::int64_t total = 0, hits = 0;
    while (true) {
        double s = 0.0;
        for (int i : idx) s += values[static_cast<std::size_t>(i)];
        ++total;
        if (s >= obs) ++hits;

        int pos = k - 1;
        while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == n - k + pos) --pos;
        if (pos < 0) break;
        ++idx[static_cast<std::size_t>(pos)];
        for (int i = pos + 1; i < k; ++i)
            idx[static_cast<std::size_t>(i)] = idx[static_cast<std::size_t>(i - 1)] + 1;
    }
    return static_cast<double>(hits) / static_cast<double>(total);
}

BuiltinSource::BuiltinSource(const SamplerSpec& spec, std::uint64_t seed,
                             rng::Domain data_domain, rng::Domain bit_domain,
                             std::uint64_t n_streams)
    : spec_(spec), seed_(seed), data_tag_(rng::tag(data_domain)),
      bit_tag_(rng::tag(bit_domain)) {
    spec_.validate();
    if (spec_.kind == SamplerSpec::Kind::external)
        throw std::invalid_argument("BuiltinSource: external spec");

    if (spec_.kind == SamplerSpec::Kind::permutation) {
        const int n = spec_.perm_k + spec_.perm_l;
        values_.resize(n_streams * static_cast<std::uint64_t>(n));
        obs_sum_.resize(n_streams);
        for (std::uint64_t i = 0; i < n_streams; ++i) {
            rng::CounterEngine eng(rng::hash4(seed_, data_tag_, i, 0));
            double* v = &values_[i * static_cast<std::uint64_t>(n)];
            double obs = 0.0;
            for (int j = 0; j < spec_.perm_k; ++j) {
                v[j] = spec_.effect * spec_.sigma + spec_.sigma * eng.normal();
                obs += v[j];
            }
            for (int j = spec_.perm_k; j < n; ++j)
                v[j] = spec_.sigma * eng.normal();
            obs_sum_[i] = obs;
        }
        return;
    }

    p_.resize(n_streams);
    key_.resize(n_streams);
    for (std::uint64_t i = 0; i < n_streams; ++i) {
        key_[i] = rng::stream_key(seed_, bit_tag_, i);
        const double v = rng::uniform(seed_, data_tag_, i, 0);
        switch (spec_.kind) {
        case SamplerSpec::Kind::beta:
            // Beta(1,x): F(p) = 1 - (1-p)^x
            p_[i] = 1.0 - std::pow(1.0 - v, 1.0 / spec_.beta_x);
            break;
        case SamplerSpec::Kind::fixed_p:
            p_[i] = spec_.fixed_p;
            break;
        case SamplerSpec::Kind::discrete: {
            double acc = 0.0;
            double chosen = spec_.support.back();
            for (std::size_t k = 0; k < spec_.support.size(); ++k) {
                acc += spec_.weights[k];
                if (v < acc) { chosen = spec_.support[k]; break; }
            }
            p_[i] = chosen;
            break;
        }
        default:
            break;
        }
    }
}

bool BuiltinSource::perm_bit(std::uint64_t id, std::int64_t step) const {
    const int n = spec_.perm_k + spec_.perm_l;
    const double* v = &values_[id * static_cast<std::uint64_t>(n)];
    rng::CounterEngine eng(rng::hash4(seed_, bit_tag_, id, static_cast<std::uint64_t>(step)));
    // Partial Fisher-Yates: pick K of n labels uniformly.
    int idx[16];
    for (int i = 0; i < n; ++i) idx[i] = i;
    double s = 0.0;
    for (int i = 0; i < spec_.perm_k; ++i) {
        const int j = i + static_cast<int>(eng.below(static_cast<std::uint64_t>(n - i)));
        std::swap(idx[i], idx[j]);
        s += v[idx[i]];
    }
    return s >= obs_sum_[id];
}

bool BuiltinSource::bit(std::uint64_t id, std::int64_t step) const {
    if (spec_.kind == SamplerSpec::Kind::permutation) return perm_bit(id, step);
    return rng::to_unit(rng::keyed_bits(key_[id], static_cast<std::uint64_t>(step))) <
           p_[id];
}

void BuiltinSource::advance(std::uint64_t id, StreamState& st,
                            std::span<const std::int32_t> L,
                            std::span<const std::int32_t> U, std::int64_t t1) {
    if (st.status != StreamStatus::unresolved) return;
    if (spec_.kind == SamplerSpec::Kind::permutation) {
        for (std::int64_t j = st.steps + 1; j <= t1; ++j) {
            st.sum += perm_bit(id, j) ? 1 : 0;
            st.steps = j;
            if (st.sum >= U[static_cast<std::size_t>(j)]) { st.status = StreamStatus::negative; return; }
            if (st.sum <= L[static_cast<std::size_t>(j)]) { st.status = StreamStatus::positive; return; }
        }
        return;
    }
    const double p = p_[id];
    const std::uint64_t key = key_[id];
    for (std::int64_t j = st.steps + 1; j <= t1; ++j) {
        st.sum += rng::to_unit(rng::keyed_bits(key, static_cast<std::uint64_t>(j))) < p
                      ? 1
                      : 0;
        st.steps = j;
        if (st.sum >= U[static_cast<std::size_t>(j)]) { st.status = StreamStatus::negative; return; }
        if (st.sum <= L[static_cast<std::size_t>(j)]) { st.status = StreamStatus::positive; return; }
    }
}

std::int64_t BuiltinSource::bit_sum(std::uint64_t id, std::int64_t m) {
    std::int64_t s = 0;
    for (std::int64_t j = 1; j <= m; ++j) s += bit(id, j) ? 1 : 0;
    return s;
}

double BuiltinSource::stream_p(std::uint64_t id) const {
    if (spec_.kind == SamplerSpec::Kind::permutation)
        return exact_permutation_pvalue(dataset(id), spec_.perm_k);
    return p_[id];
}

std::span<const double> BuiltinSource::dataset(std::uint64_t id) const {
    if (spec_.kind != SamplerSpec::Kind::permutation)
        throw std::logic_error("dataset: not a permutation sampler");
    const int n = spec_.perm_k + spec_.perm_l;
    return {&values_[id * static_cast<std::uint64_t>(n)], static_cast<std::size_t>(n)};
}

std::unique_ptr<StreamSource> make_source(const SamplerSpec& spec, std::uint64_t seed,
                                          rng::Domain data_domain,
                                          rng::Domain bit_domain,
                                          std::uint64_t n_streams) {
    spec.validate();
    if (spec.kind == SamplerSpec::Kind::external)
        return std::make_unique<ExternalSource>(spec.command, spec.external_procs,
                                                spec.timeout_seconds);
    return std::make_unique<BuiltinSource>(spec, seed, data_domain, bit_domain, n_streams);
}

} // namespace mcpower
