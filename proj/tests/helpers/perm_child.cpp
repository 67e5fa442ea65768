// Protocol demo child: serves resample-exceedance bits for a two-sample
// Gaussian permutation test over the line protocol
//   "S <id>"  open stream <id> (a fresh dataset is generated)
//   "X <id>"  reply one bit, "0" or "1"
// Datasets and resamples derive from (--seed, id), so a restarted child
// reproduces the same dataset for the same id.
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <iostream>
#include <sstream>
#include <string>
#include <unordered_map>

#include "mcpower/samplers.hpp"

using namespace mcpower;

int main(int argc, char** argv) {
    SamplerSpec spec;
    spec.kind = SamplerSpec::Kind::permutation;
    std::uint64_t seed = 424243;
    for (int i = 1; i + 1 < argc; i += 2) {
        const std::string key = argv[i];
        const char* val = argv[i + 1];
        if (key == "--seed") seed = std::strtoull(val, nullptr, 10);
        else if (key == "--K") spec.perm_k = std::atoi(val);
        else if (key == "--L") spec.perm_l = std::atoi(val);
        else if (key == "--effect") spec.effect = std::atof(val);
        else {
            std::fprintf(stderr, "perm_child: unknown flag %s\n", key.c_str());
            return 2;
        }
    }

    // Datasets are derived lazily per id; the source is sized generously
    // and ids beyond it are rejected.
    constexpr std::uint64_t kMaxStreams = 1 << 16;
    BuiltinSource source(spec, seed, rng::Domain::main_data, rng::Domain::main_bits,
                         kMaxStreams);
    std::unordered_map<std::uint64_t, std::int64_t> next_step;

    std::string line;
    while (std::getline(std::cin, line)) {
        std::istringstream in(line);
        std::string op;
        std::uint64_t id = 0;
        if (!(in >> op >> id) || id >= kMaxStreams) {
            std::fprintf(stderr, "perm_child: bad request: %s\n", line.c_str());
            return 2;
        }
        if (op == "S") {
            next_step[id] = 0;
        } else if (op == "X") {
            const std::int64_t step = ++next_step[id];
            std::fputs(source.bit(id, step) ? "1\n" : "0\n", stdout);
            std::fflush(stdout);
        } else {
            std::fprintf(stderr, "perm_child: unknown op: %s\n", line.c_str());
            return 2;
        }
    }
    return 0;
}
