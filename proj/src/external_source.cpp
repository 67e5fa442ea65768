#include "mcpower/external_source.hpp"

#include <cerrno>
#include <csignal>
#include <cstring>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

namespace mcpower {

ExternalSource::ExternalSource(std::string command, int procs, double timeout_seconds)
    : command_(std::move(command)), timeout_seconds_(timeout_seconds) {
    if (procs < 1) throw std::invalid_argument("ExternalSource: procs must be >= 1");
    ::signal(SIGPIPE, SIG_IGN);

    for (int i = 0; i < procs; ++i) {
        int to_child[2], from_child[2];
        if (::pipe2(to_child, O_CLOEXEC) != 0 || ::pipe2(from_child, O_CLOEXEC) != 0)
            throw std::runtime_error("ExternalSource: pipe failed");

        const pid_t pid = ::fork();
        if (pid < 0) throw std::runtime_error("ExternalSource: fork failed");
        if (pid == 0) {
            // own process group so the whole command tree can be reaped
            ::setpgid(0, 0);
            ::dup2(to_child[0], STDIN_FILENO); // dup2 clears CLOEXEC
            ::dup2(from_child[1], STDOUT_FILENO);
            ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
            _exit(127);
        }
        ::setpgid(pid, pid);
        ::close(to_child[0]);
        ::close(from_child[1]);

        auto c = std::make_unique<Child>();
        c->pid = pid;
        c->to_fd = to_child[1];
        c->from_fd = from_child[0];
        children_.push_back(std::move(c));
    }
}

ExternalSource::~ExternalSource() {
    for (auto& c : children_) {
        if (c->to_fd >= 0) ::close(c->to_fd);
        if (c->from_fd >= 0) ::close(c->from_fd);
        if (c->pid > 0) {
            ::kill(-c->pid, SIGTERM);
            int status = 0;
            bool reaped = false;
            for (int i = 0; i < 100; ++i) {
                if (::waitpid(c->pid, &status, WNOHANG) == c->pid) {
                    reaped = true;
                    break;
                }
                ::usleep(2000);
            }
            ::kill(-c->pid, SIGKILL); // sweep stragglers in the group
            if (!reaped) ::waitpid(c->pid, &status, 0);
        }
    }
}

void ExternalSource::send_line(Child& c, const std::string& line, std::uint64_t id) {
    const char* data = line.data();
    std::size_t left = line.size();
    while (left > 0) {
        const ssize_t n = ::write(c.to_fd, data, left);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw SamplerError("external sampler: child write failed for stream " +
                                   std::to_string(id) + " (" + std::strerror(errno) + ")",
                               id);
        }
        data += n;
        left -= static_cast<std::size_t>(n);
    }
}

std::string ExternalSource::read_line(Child& c, std::uint64_t id) {
    for (;;) {
        const auto nl = c.buffer.find('\n');
        if (nl != std::string::npos) {
            std::string line = c.buffer.substr(0, nl);
            c.buffer.erase(0, nl + 1);
            if (!line.empty() && line.back() == '\r') line.pop_back();
            return line;
        }

        struct pollfd pfd{c.from_fd, POLLIN, 0};
        const int timeout_ms = static_cast<int>(timeout_seconds_ * 1000.0);
        const int pr = ::poll(&pfd, 1, timeout_ms);
        if (pr == 0)
            throw SamplerError("external sampler: timeout waiting for reply on stream " +
                                   std::to_string(id),
                               id);
        if (pr < 0) {
            if (errno == EINTR) continue;
            throw SamplerError("external sampler: poll failed for stream " +
                                   std::to_string(id),
                               id);
        }
        char buf[4096];
        const ssize_t n = ::read(c.from_fd, buf, sizeof buf);
        if (n == 0)
            throw SamplerError("external sampler: child exited while serving stream " +
                                   std::to_string(id),
                               id);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw SamplerError("external sampler: read failed for stream " +
                                   std::to_string(id),
                               id);
        }
        c.buffer.append(buf, static_cast<std::size_t>(n));
    }
}

bool ExternalSource::request_bit(Child& c, std::uint64_t id) {
    if (!c.open_streams.contains(id)) {
        send_line(c, "S " + std::to_string(id) + "\n", id);
        c.open_streams.insert(id);
    }
    send_line(c, "X " + std::to_string(id) + "\n", id);
    const std::string reply = read_line(c, id);
    if (reply == "0") return false;
    if (reply == "1") return true;
    throw SamplerError("external sampler: protocol error on stream " +
                           std::to_string(id) + ": got \"" + reply + "\"",
                       id);
}

bool ExternalSource::bit(std::uint64_t id) {
    Child& c = child_for(id);
    std::lock_guard<std::mutex> lk(c.mtx);
    return request_bit(c, id);
}

void ExternalSource::advance(std::uint64_t id, StreamState& st,
                             std::span<const std::int32_t> L,
                             std::span<const std::int32_t> U, std::int64_t t1) {
    if (st.status != StreamStatus::unresolved) return;
    Child& c = child_for(id);
    std::lock_guard<std::mutex> lk(c.mtx);
    for (std::int64_t j = st.steps + 1; j <= t1; ++j) {
        st.sum += request_bit(c, id) ? 1 : 0;
        st.steps = j;
        if (st.sum >= U[static_cast<std::size_t>(j)]) { st.status = StreamStatus::negative; return; }
        if (st.sum <= L[static_cast<std::size_t>(j)]) { st.status = StreamStatus::positive; return; }
    }
}

std::int64_t ExternalSource::bit_sum(std::uint64_t id, std::int64_t m) {
    Child& c = child_for(id);
    std::lock_guard<std::mutex> lk(c.mtx);
    std::int64_t s = 0;
    for (std::int64_t j = 0; j < m; ++j) s += request_bit(c, id) ? 1 : 0;
    return s;
}

} // namespace mcpower
