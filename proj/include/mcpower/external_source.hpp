// External stream source speaking a line protocol over a child's
// standard streams:
//   parent -> child:  "S <id>\n"   open stream <id> (child builds a dataset)
//   parent -> child:  "X <id>\n"   request one resample indicator
//   child -> parent:  "0\n" or "1\n"
// Any other reply is a protocol error. Children are serialized resources;
// streams are partitioned among them by id.
#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_set>
#include <vector>

#include "mcpower/samplers.hpp"

namespace mcpower {

class ExternalSource : public StreamSource {
public:
    ExternalSource(std::string command, int procs, double timeout_seconds);
    ~ExternalSource() override;

    ExternalSource(const ExternalSource&) = delete;
    ExternalSource& operator=(const ExternalSource&) = delete;

    void advance(std::uint64_t id, StreamState& st,
                 std::span<const std::int32_t> L,
                 std::span<const std::int32_t> U, std::int64_t t1) override;
    std::int64_t bit_sum(std::uint64_t id, std::int64_t m) override;

    bool replayable() const override { return false; }
    int required_shards() const override { return static_cast<int>(children_.size()); }
    std::uint64_t shard_of(std::uint64_t id) const override {
        return id % children_.size();
    }

    bool bit(std::uint64_t id);

private:
    struct Child {
        pid_t pid = -1;
        int to_fd = -1;
        int from_fd = -1;
        std::string buffer;
        std::unordered_set<std::uint64_t> open_streams;
        std::mutex mtx;
    };

    Child& child_for(std::uint64_t id) { return *children_[id % children_.size()]; }
    void send_line(Child& c, const std::string& line, std::uint64_t id);
    std::string read_line(Child& c, std::uint64_t id);
    bool request_bit(Child& c, std::uint64_t id);

    std::string command_;
    double timeout_seconds_;
    std::vector<std::unique_ptr<Child>> children_;
};

} // namespace mcpower
