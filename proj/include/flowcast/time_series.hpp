#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace flowcast {

/// Width of one traffic-flow aggregation bin.
inline constexpr std::int64_t kFlowIntervalSeconds = 900;

/// Uniformly spaced sequence of finite values. The timestamp of values()[i]
/// is start_time() + i * interval_seconds(); gaps are not representable and
/// must be resolved before construction. Immutable after construction, so
/// instances are safe to share across threads.
class TimeSeries {
public:
    TimeSeries() = default;

    /// Throws InvalidParameterError on non-positive interval or non-finite values.
    TimeSeries(std::vector<double> values, std::int64_t start_time,
               std::int64_t interval_seconds = kFlowIntervalSeconds);

    const std::vector<double>& values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }
    double operator[](std::size_t i) const { return values_[i]; }

    std::int64_t start_time() const noexcept { return start_time_; }
    std::int64_t interval_seconds() const noexcept { return interval_seconds_; }
    std::int64_t time_at(std::size_t i) const {
        return start_time_ + static_cast<std::int64_t>(i) * interval_seconds_;
    }

    /// Sub-series of `count` values beginning at index `offset`.
    TimeSeries slice(std::size_t offset, std::size_t count) const;

private:
    std::vector<double> values_;
    std::int64_t start_time_ = 0;
    std::int64_t interval_seconds_ = kFlowIntervalSeconds;
};

/// Half-open interval of UTC timestamps.
struct TimeWindow {
    std::int64_t start = 0;
    std::int64_t end = 0;
};

/// Applies y(t) = x(t) - x(t-1) exactly d times. Output is d values shorter
/// and starts d intervals later. Throws InsufficientDataError if length <= d.
TimeSeries difference(const TimeSeries& series, int d);

/// Exact inverse of difference(). `seed_values` are the last d original-scale
/// values immediately preceding the differenced block; the reconstruction
/// reproduces the original series minus its first d values. Throws
/// AnchorMismatchError when the seed count is not d.
TimeSeries integrate(const TimeSeries& diffed, std::span<const double> seed_values, int d);

/// Sample autocorrelations r_1..r_max_lag using the biased (divide by n)
/// mean-centered estimator. Requires length > max_lag and length >= 2;
/// throws DegenerateSeriesError on a zero-variance series.
std::vector<double> acf(const TimeSeries& series, int max_lag);

/// Smallest d in [0, max_d] such that one more difference does not strictly
/// reduce the sample standard deviation. Requires length > max_d + 2.
int select_d(const TimeSeries& series, int max_d);

}  // namespace flowcast
