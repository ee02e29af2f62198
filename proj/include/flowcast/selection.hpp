#pragma once

#include <optional>
#include <string>
#include <vector>

#include "flowcast/arima.hpp"

namespace flowcast {

/// One cell of the selection grid: a BIC value, or the reason its fit failed.
struct GridEntry {
    ArimaOrder order;
    std::optional<double> bic;
    std::string failure;
};

struct SelectionResult {
    ArimaOrder chosen;
    ArimaModel chosen_model;
    std::vector<GridEntry> table;  ///< full grid, sorted by (p, q)
    std::size_t n = 0;             ///< common effective sample size
    std::string k_rule;
};

/// Bayesian information criterion, k ln(n) - 2 log_likelihood.
double bic(double log_likelihood, int k, std::size_t n);

/// Fits every (p, d, q) with p <= p_max and q <= q_max and returns the
/// lowest-BIC model, ties broken by smaller p+q then smaller p. All fits are
/// conditioned on the same effective sample (the first p_max + q_max
/// differenced observations are excluded from every SSE) so BIC values are
/// comparable; k = p + q + 2 counts intercept and innovation variance.
/// Individual fit failures are recorded in the table; throws
/// SelectionFailedError only if every cell fails.
SelectionResult grid_search(const TimeSeries& series, int p_max, int q_max, int d,
                            const FitConfig& config = {});

}  // namespace flowcast
