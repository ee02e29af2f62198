#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "flowcast/time_series.hpp"

namespace flowcast {

struct ArimaOrder {
    int p = 0;  ///< autoregressive terms
    int d = 0;  ///< differencing passes
    int q = 0;  ///< moving-average (lagged-error) terms

    int param_count() const noexcept { return p + q + 1; }  // intercept + coefficients
    bool operator==(const ArimaOrder&) const = default;
};

struct OrderCaps {
    int p_cap = 5;
    int q_cap = 5;
    int d_cap = 2;
};

/// Throws InvalidParameterError when the order is negative or exceeds the caps.
void validate_order(const ArimaOrder& order, const OrderCaps& caps = {});

/// Fitted ARIMA(p,d,q). The d-times differenced series w follows
///   w(t) = c + sum_i phi_i w(t-i) + e(t) + sum_j theta_j e(t-j)
/// with innovations e of variance sigma2. Both characteristic polynomials
/// have all roots strictly outside the unit circle.
struct ArimaModel {
    ArimaOrder order;
    double intercept = 0.0;
    std::vector<double> ar_coeffs;
    std::vector<double> ma_coeffs;
    double sigma2 = 1.0;
    double log_likelihood = 0.0;
    std::size_t n_effective = 0;
};

struct FitConfig {
    int max_optimizer_iterations = 2000;
    double convergence_tolerance = 1e-8;  ///< on objective change
    double stationarity_penalty = 1e12;   ///< added per unit of root violation
    std::uint64_t seed = 0;               ///< restart jitter
    int restarts = 2;                     ///< extra jittered starts beyond the first
};

/// Conditional residuals e(t) on the differenced scale, zero-initialized for
/// the first p observations; returns the (n - d) - p values from t = p+1 on.
TimeSeries residuals(const ArimaModel& model, const TimeSeries& series);

/// Conditional sum of squares of a candidate parameter vector packed as
/// (c, phi_1..phi_p, theta_1..theta_q). Root-constraint violations add
/// stationarity_penalty * violation instead of returning infinity.
double css_objective(std::span<const double> params, const TimeSeries& series,
                     const ArimaOrder& order, double stationarity_penalty = 1e12);

/// CSS estimation via Nelder-Mead restarts. sigma2 = SSE / n_effective and
/// log_likelihood = -(n_effective/2) (ln(2 pi sigma2) + 1). Throws
/// FitFailedError when no restart converges to an admissible model.
ArimaModel fit(const TimeSeries& series, const ArimaOrder& order, const FitConfig& config = {});

/// Iterates the prediction equation with future innovations set to zero and
/// integrates back through d levels using the tail of `history`.
std::vector<double> forecast(const ArimaModel& model, const TimeSeries& history, int horizon);

/// One prediction per test observation, each using all data before it, with
/// parameters held fixed. `test` must start exactly one interval after the
/// last train observation (AlignmentError otherwise).
std::vector<double> rolling_one_step(const ArimaModel& model, const TimeSeries& train,
                                     const TimeSeries& test);

/// Generating parameters for simulate_arima.
struct ArimaParams {
    double intercept = 0.0;
    std::vector<double> ar;
    std::vector<double> ma;
    double sigma2 = 1.0;
};

/// Seeded synthetic ARIMA draw: Gaussian innovations, ARMA recursion with a
/// burn-in of max(200, 10 (p+q)) discarded values, then d integration passes
/// from zero anchors. Identical arguments give bit-identical output.
TimeSeries simulate_arima(const ArimaOrder& order, const ArimaParams& params, std::size_t n,
                          std::uint64_t seed, std::int64_t start_time = 0,
                          std::int64_t interval_seconds = kFlowIntervalSeconds);

/// Smallest root modulus of 1 - a_1 z - ... - a_p z^p (AR sign convention).
/// Coefficient-free polynomials report +infinity.
double min_ar_root_modulus(std::span<const double> phi);
/// Smallest root modulus of 1 + b_1 z + ... + b_q z^q (MA sign convention).
double min_ma_root_modulus(std::span<const double> theta);

namespace detail {

/// fit() with the SSE window starting at differenced index `sse_start`
/// instead of p; grid search uses this to keep BIC samples comparable.
ArimaModel fit_trimmed(const TimeSeries& series, const ArimaOrder& order, const FitConfig& config,
                       std::size_t sse_start);

}  // namespace detail

}  // namespace flowcast
