#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "tdelab/errors.hpp"

namespace tdelab {

/// Number of grid steps in a delay; throws unless rho is a positive integer multiple of dt.
inline int delay_steps(double rho, double dt) {
    if (!(dt > 0.0) || !(rho > 0.0)) throw HistoryError("delay and step must be positive");
    const double ratio = rho / dt;
    const double n = std::round(ratio);
    if (n < 1.0 || std::abs(ratio - n) > 1e-9 * std::max(1.0, ratio)) {
        throw HistoryError("delay " + std::to_string(rho) + " s is not an integer multiple of dt=" +
                           std::to_string(dt) + " s");
    }
    return static_cast<int>(n);
}

/// Fixed-step ring buffer of samples on the grid t0 + k*dt. Lookups must hit a
/// grid node exactly; the buffer never interpolates.
template <class Sample>
class HistoryBuffer {
public:
    HistoryBuffer(double dt, std::size_t capacity, double t0 = 0.0) : dt_(dt), t0_(t0), ring_(capacity) {
        if (!(dt > 0.0)) throw HistoryError("history step must be positive");
        if (capacity == 0) throw HistoryError("history capacity must be positive");
    }

    /// Smallest capacity that serves lookups at t - rho and t - 2 rho.
    static std::size_t capacity_for(double dt, double rho) {
        return 2 * static_cast<std::size_t>(delay_steps(rho, dt)) + 1;
    }

    /// Appends the sample for the next grid time and returns a reference to it.
    Sample& push(Sample s) {
        Sample& slot = ring_[static_cast<std::size_t>(count_ % static_cast<std::int64_t>(ring_.size()))];
        slot = std::move(s);
        ++count_;
        return slot;
    }

    Sample& back() {
        if (count_ == 0) throw HistoryError("history is empty");
        return ring_[static_cast<std::size_t>((count_ - 1) % static_cast<std::int64_t>(ring_.size()))];
    }

    double dt() const { return dt_; }
    double t0() const { return t0_; }
    std::size_t capacity() const { return ring_.size(); }
    bool empty() const { return count_ == 0; }
    /// Total samples ever pushed (grid index of the next sample).
    std::int64_t count() const { return count_; }
    double time_of(std::int64_t index) const { return t0_ + static_cast<double>(index) * dt_; }
    double newest_time() const { return time_of(count_ - 1); }

    /// Grid index of `t`, or -1 when t is off-grid.
    std::int64_t index_of(double t) const {
        const double k = std::round((t - t0_) / dt_);
        if (std::abs(t0_ + k * dt_ - t) > 1e-6 * dt_) return -1;
        return static_cast<std::int64_t>(k);
    }

    bool contains(double t) const {
        const std::int64_t k = index_of(t);
        return k >= 0 && k < count_ && k >= count_ - static_cast<std::int64_t>(ring_.size());
    }

    const Sample& at(double t) const {
        const std::int64_t k = index_of(t);
        if (k < 0) throw HistoryError("lookup at t=" + std::to_string(t) + " is off the history grid");
        if (k >= count_ || k < count_ - static_cast<std::int64_t>(ring_.size())) {
            throw HistoryError("no stored sample at t=" + std::to_string(t));
        }
        return ring_[static_cast<std::size_t>(k % static_cast<std::int64_t>(ring_.size()))];
    }

private:
    double dt_;
    double t0_;
    std::vector<Sample> ring_;
    std::int64_t count_ = 0;
};

}  // namespace tdelab
