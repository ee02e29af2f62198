#include "flowcast/time_series.hpp"

#include <cmath>
#include <string>

#include "flowcast/errors.hpp"

namespace flowcast {

TimeSeries::TimeSeries(std::vector<double> values, std::int64_t start_time,
                       std::int64_t interval_seconds)
    : values_(std::move(values)), start_time_(start_time), interval_seconds_(interval_seconds) {
    if (interval_seconds_ <= 0) {
        throw InvalidParameterError("interval_seconds must be positive, got " +
                                    std::to_string(interval_seconds_));
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            throw InvalidParameterError("non-finite value at index " + std::to_string(i));
        }
    }
}

TimeSeries TimeSeries::slice(std::size_t offset, std::size_t count) const {
    if (offset + count > values_.size()) {
        throw InsufficientDataError("slice [" + std::to_string(offset) + ", " +
                                    std::to_string(offset + count) + ") exceeds length " +
                                    std::to_string(values_.size()));
    }
    std::vector<double> out(values_.begin() + static_cast<std::ptrdiff_t>(offset),
                            values_.begin() + static_cast<std::ptrdiff_t>(offset + count));
    return TimeSeries(std::move(out), time_at(offset), interval_seconds_);
}

TimeSeries difference(const TimeSeries& series, int d) {
    if (d < 0) throw InvalidParameterError("differencing order must be non-negative");
    if (series.size() <= static_cast<std::size_t>(d)) {
        throw InsufficientDataError("cannot difference " + std::to_string(series.size()) +
                                    " values " + std::to_string(d) + " times");
    }
    std::vector<double> out = series.values();
    for (int pass = 0; pass < d; ++pass) {
        for (std::size_t t = 0; t + 1 < out.size(); ++t) out[t] = out[t + 1] - out[t];
        out.pop_back();
    }
    return TimeSeries(std::move(out),
                      series.start_time() + static_cast<std::int64_t>(d) * series.interval_seconds(),
                      series.interval_seconds());
}

TimeSeries integrate(const TimeSeries& diffed, std::span<const double> seed_values, int d) {
    if (d < 0) throw InvalidParameterError("differencing order must be non-negative");
    if (seed_values.size() != static_cast<std::size_t>(d)) {
        throw AnchorMismatchError("expected " + std::to_string(d) + " seed values, got " +
                                  std::to_string(seed_values.size()));
    }
    if (d == 0) return diffed;

    // Anchor for undoing level k is the last value of the k-times differenced
    // seed block; computed by differencing the seeds in place.
    std::vector<double> anchors(d);
    std::vector<double> seeds(seed_values.begin(), seed_values.end());
    anchors[0] = seeds.back();
    for (int level = 1; level < d; ++level) {
        for (std::size_t t = 0; t + 1 < seeds.size(); ++t) seeds[t] = seeds[t + 1] - seeds[t];
        seeds.pop_back();
        anchors[static_cast<std::size_t>(level)] = seeds.back();
    }

    std::vector<double> out = diffed.values();
    for (int level = d - 1; level >= 0; --level) {
        double acc = anchors[static_cast<std::size_t>(level)];
        for (double& v : out) {
            acc += v;
            v = acc;
        }
    }
    return TimeSeries(std::move(out), diffed.start_time(), diffed.interval_seconds());
}

std::vector<double> acf(const TimeSeries& series, int max_lag) {
    if (max_lag < 1) throw InvalidParameterError("max_lag must be positive");
    const std::size_t n = series.size();
    if (n < 2 || n <= static_cast<std::size_t>(max_lag)) {
        throw InsufficientDataError("acf needs length > max_lag and >= 2, got length " +
                                    std::to_string(n));
    }
    const auto& x = series.values();
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);

    double denom = 0.0;
    for (double v : x) denom += (v - mean) * (v - mean);
    if (denom == 0.0) throw DegenerateSeriesError("zero-variance series has no autocorrelation");

    std::vector<double> r(static_cast<std::size_t>(max_lag));
    for (int k = 1; k <= max_lag; ++k) {
        double num = 0.0;
        for (std::size_t t = static_cast<std::size_t>(k); t < n; ++t) {
            num += (x[t] - mean) * (x[t - static_cast<std::size_t>(k)] - mean);
        }
        r[static_cast<std::size_t>(k - 1)] = num / denom;
    }
    return r;
}

namespace {

double sample_std(const std::vector<double>& x) {
    const double n = static_cast<double>(x.size());
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / (n - 1.0));
}

}  // namespace

int select_d(const TimeSeries& series, int max_d) {
    if (max_d < 0) throw InvalidParameterError("max_d must be non-negative");
    if (series.size() <= static_cast<std::size_t>(max_d) + 2) {
        throw InsufficientDataError("select_d needs length > max_d + 2, got " +
                                    std::to_string(series.size()));
    }
    std::vector<double> current = series.values();
    int d = 0;
    while (d < max_d) {
        std::vector<double> next(current.size() - 1);
        for (std::size_t t = 0; t + 1 < current.size(); ++t) next[t] = current[t + 1] - current[t];
        if (!(sample_std(next) < sample_std(current))) break;
        current = std::move(next);
        ++d;
    }
    return d;
}

}  // namespace flowcast
