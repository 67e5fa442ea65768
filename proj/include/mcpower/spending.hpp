// Error-spending sequences: the per-stream budget eps_t used by the
// stopping boundaries and the checkpoint budget xi_t used by the joint
// test on unresolved streams.
#pragma once

#include <cstdint>
#include <stdexcept>

namespace mcpower {

// eps_t = eps * t / (half_life + t), nondecreasing with limit eps.
struct SpendingSchedule {
    double epsilon_total = 1e-4;
    std::int64_t half_life = 1000;

    void validate() const {
        if (!(epsilon_total > 0.0 && epsilon_total < 1.0))
            throw std::invalid_argument("spending: epsilon must be in (0,1)");
        if (half_life < 1)
            throw std::invalid_argument("spending: half_life must be >= 1");
    }

    double epsilon_at(std::int64_t t) const {
        if (t < 0) throw std::invalid_argument("spending: t must be >= 0");
        const double td = static_cast<double>(t);
        return epsilon_total * td / (static_cast<double>(half_life) + td);
    }

    // Increment lower bound eps_t - eps_{t-1} >= lambda * t^-q for t >= T.
    // For the ratio form the increment is eps*h/((h+t)(h+t-1)), which is
    // >= (eps*h/4) * t^-2 once t >= h.
    double reported_lambda() const {
        return epsilon_total * static_cast<double>(half_life) / 4.0;
    }
    double reported_q() const { return 2.0; }
    std::int64_t reported_T() const { return half_life; }
};

// Budget for the joint test: positive only at checkpoints t_i = i*stride,
// with cumulative spend through checkpoint i equal to
// gamma_joint * i / (horizon_constant + i).
struct JointSpendingSchedule {
    double gamma_joint = 0.0;
    std::int64_t checkpoint_stride = 200000;
    std::int64_t horizon_constant = 20;

    void validate() const {
        if (gamma_joint < 0.0 || gamma_joint >= 1.0)
            throw std::invalid_argument("joint spending: gamma_joint must be in [0,1)");
        if (checkpoint_stride < 1)
            throw std::invalid_argument("joint spending: stride must be >= 1");
        if (horizon_constant < 1)
            throw std::invalid_argument("joint spending: horizon constant must be >= 1");
    }

    double xi_cumulative_at_checkpoint(std::int64_t i) const {
        if (i < 0) throw std::invalid_argument("joint spending: checkpoint index must be >= 0");
        const double id = static_cast<double>(i);
        return gamma_joint * id / (static_cast<double>(horizon_constant) + id);
    }

    // xi spent at checkpoint i alone (first difference of the cumulative).
    double xi_at_checkpoint(std::int64_t i) const {
        if (i < 1) throw std::invalid_argument("joint spending: checkpoint index must be >= 1");
        return xi_cumulative_at_checkpoint(i) - xi_cumulative_at_checkpoint(i - 1);
    }

    std::int64_t checkpoint_time(std::int64_t i) const { return i * checkpoint_stride; }

    bool is_checkpoint(std::int64_t t) const {
        return t > 0 && t % checkpoint_stride == 0;
    }
};

} // namespace mcpower
