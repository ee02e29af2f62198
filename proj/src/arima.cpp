#include "flowcast/arima.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include "flowcast/errors.hpp"
#include "flowcast/rng.hpp"
#include "flowcast/simplex.hpp"

namespace flowcast {

namespace {

constexpr double kRootMargin = 1e-6;       // roots must clear 1 + kRootMargin
constexpr double kSigma2Floor = 1e-20;     // keeps sigma2 > 0 on perfect fits
constexpr double kObjectiveCap = 1e300;    // overflow guard for explosive candidates

// Roots of a_0 + a_1 z + ... + a_deg z^deg by Durand-Kerner iteration.
// Trailing near-zero coefficients are trimmed first; degree <= 5 in practice.
std::vector<std::complex<double>> polynomial_roots(std::vector<double> coeffs) {
    while (coeffs.size() > 1 && std::abs(coeffs.back()) < 1e-12) coeffs.pop_back();
    const std::size_t deg = coeffs.size() - 1;
    std::vector<std::complex<double>> roots(deg);
    if (deg == 0) return roots;

    const std::complex<double> base(0.4, 0.9);
    std::complex<double> power(1.0, 0.0);
    for (std::size_t k = 0; k < deg; ++k) {
        power *= base;
        roots[k] = power;
    }
    const double lead = coeffs.back();
    auto eval = [&](std::complex<double> z) {
        std::complex<double> acc(0.0, 0.0);
        for (std::size_t i = coeffs.size(); i-- > 0;) acc = acc * z + coeffs[i];
        return acc;
    };
    for (int iter = 0; iter < 200; ++iter) {
        double shift = 0.0;
        for (std::size_t k = 0; k < deg; ++k) {
            std::complex<double> denom(lead, 0.0);
            for (std::size_t j = 0; j < deg; ++j) {
                if (j != k) denom *= roots[k] - roots[j];
            }
            if (denom == std::complex<double>(0.0, 0.0)) {
                denom = std::complex<double>(1e-30, 1e-30);
            }
            const std::complex<double> delta = eval(roots[k]) / denom;
            roots[k] -= delta;
            shift = std::max(shift, std::abs(delta));
        }
        if (shift < 1e-13) break;
    }
    return roots;
}

double min_root_modulus(std::span<const double> coeffs, double sign) {
    std::vector<double> poly(coeffs.size() + 1);
    poly[0] = 1.0;
    for (std::size_t i = 0; i < coeffs.size(); ++i) poly[i + 1] = sign * coeffs[i];
    const auto roots = polynomial_roots(std::move(poly));
    double min_mod = std::numeric_limits<double>::infinity();
    for (const auto& r : roots) min_mod = std::min(min_mod, std::abs(r));
    return min_mod;
}

// Total shortfall of root moduli below 1 + kRootMargin. The absolute-sum
// bound sum |a_i| <= 0.999 guarantees all roots outside that circle for
// degree <= 100, so the usual case skips root finding entirely.
double root_violation(std::span<const double> coeffs, double sign) {
    if (coeffs.empty()) return 0.0;
    double abs_sum = 0.0;
    for (double c : coeffs) abs_sum += std::abs(c);
    if (abs_sum <= 0.999) return 0.0;

    std::vector<double> poly(coeffs.size() + 1);
    poly[0] = 1.0;
    for (std::size_t i = 0; i < coeffs.size(); ++i) poly[i + 1] = sign * coeffs[i];
    double violation = 0.0;
    for (const auto& r : polynomial_roots(std::move(poly))) {
        violation += std::max(0.0, (1.0 + kRootMargin) - std::abs(r));
    }
    return violation;
}

// Residual recursion on the differenced series. e_buf receives the full
// residual array (zeros for t < p); the return value sums e(t)^2 for
// t >= sse_start only.
double css_sse(std::span<const double> w, int p, int q, std::size_t sse_start,
               std::span<const double> params, std::vector<double>& e_buf) {
    const std::size_t m = w.size();
    const double c = params[0];
    const double* phi = params.data() + 1;
    const double* theta = params.data() + 1 + p;
    e_buf.assign(m, 0.0);
    double sse = 0.0;
    for (std::size_t t = static_cast<std::size_t>(p); t < m; ++t) {
        double pred = c;
        for (int i = 0; i < p; ++i) pred += phi[i] * w[t - 1 - static_cast<std::size_t>(i)];
        const int j_max = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(q), t));
        for (int j = 0; j < j_max; ++j) pred += theta[j] * e_buf[t - 1 - static_cast<std::size_t>(j)];
        const double e = w[t] - pred;
        e_buf[t] = e;
        if (t >= sse_start) sse += e * e;
    }
    return sse;
}

double penalized_objective(std::span<const double> w, const ArimaOrder& order,
                           std::size_t sse_start, double penalty,
                           std::span<const double> params, std::vector<double>& e_buf) {
    double sse = css_sse(w, order.p, order.q, sse_start, params, e_buf);
    if (!std::isfinite(sse) || sse > kObjectiveCap) sse = kObjectiveCap;
    const double violation =
        root_violation(params.subspan(1, static_cast<std::size_t>(order.p)), -1.0) +
        root_violation(params.subspan(1 + static_cast<std::size_t>(order.p),
                                      static_cast<std::size_t>(order.q)),
                       1.0);
    return sse + penalty * violation;
}

double vector_mean(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return x.empty() ? 0.0 : s / static_cast<double>(x.size());
}

void check_order_nonnegative(const ArimaOrder& order) {
    if (order.p < 0 || order.d < 0 || order.q < 0) {
        throw InvalidParameterError("ARIMA order components must be non-negative");
    }
}

double concentrated_log_likelihood(double sigma2, std::size_t n_effective) {
    return -0.5 * static_cast<double>(n_effective) *
           (std::log(2.0 * 3.141592653589793238462643383279502884 * sigma2) + 1.0);
}

}  // namespace

void validate_order(const ArimaOrder& order, const OrderCaps& caps) {
    check_order_nonnegative(order);
    if (order.p > caps.p_cap || order.q > caps.q_cap || order.d > caps.d_cap) {
        throw InvalidParameterError("order (" + std::to_string(order.p) + "," +
                                    std::to_string(order.d) + "," + std::to_string(order.q) +
                                    ") exceeds caps (" + std::to_string(caps.p_cap) + "," +
                                    std::to_string(caps.d_cap) + "," + std::to_string(caps.q_cap) +
                                    ")");
    }
}

double min_ar_root_modulus(std::span<const double> phi) { return min_root_modulus(phi, -1.0); }

double min_ma_root_modulus(std::span<const double> theta) { return min_root_modulus(theta, 1.0); }

TimeSeries residuals(const ArimaModel& model, const TimeSeries& series) {
    const auto& [p, d, q] = model.order;
    check_order_nonnegative(model.order);
    if (series.size() <= static_cast<std::size_t>(p + d)) {
        throw InsufficientDataError("residuals need length > p + d = " + std::to_string(p + d));
    }
    const TimeSeries w = difference(series, d);

    std::vector<double> params;
    params.reserve(static_cast<std::size_t>(model.order.param_count()));
    params.push_back(model.intercept);
    params.insert(params.end(), model.ar_coeffs.begin(), model.ar_coeffs.end());
    params.insert(params.end(), model.ma_coeffs.begin(), model.ma_coeffs.end());

    std::vector<double> e;
    css_sse(w.values(), p, q, static_cast<std::size_t>(p), params, e);
    std::vector<double> out(e.begin() + p, e.end());
    return TimeSeries(std::move(out), w.time_at(static_cast<std::size_t>(p)),
                      w.interval_seconds());
}

double css_objective(std::span<const double> params, const TimeSeries& series,
                     const ArimaOrder& order, double stationarity_penalty) {
    check_order_nonnegative(order);
    if (params.size() != static_cast<std::size_t>(order.param_count())) {
        throw InvalidParameterError("parameter vector must pack (c, phi..., theta...); expected " +
                                    std::to_string(order.param_count()) + " values");
    }
    if (series.size() <= static_cast<std::size_t>(order.p + order.d)) {
        throw InsufficientDataError("series too short for css objective");
    }
    const TimeSeries w = difference(series, order.d);
    std::vector<double> e;
    return penalized_objective(w.values(), order, static_cast<std::size_t>(order.p),
                               stationarity_penalty, params, e);
}

namespace detail {

ArimaModel fit_trimmed(const TimeSeries& series, const ArimaOrder& order, const FitConfig& config,
                       std::size_t sse_start) {
    const auto& [p, d, q] = order;
    check_order_nonnegative(order);
    const std::size_t n = series.size();
    const std::size_t min_n = static_cast<std::size_t>(p + d + q + 20);
    if (n < min_n) {
        throw InsufficientDataError("fit needs length >= p + d + q + 20 = " +
                                    std::to_string(min_n) + ", got " + std::to_string(n));
    }

    const TimeSeries wseries = difference(series, d);
    const std::span<const double> w = wseries.values();
    const std::size_t m = w.size();
    sse_start = std::max(sse_start, static_cast<std::size_t>(p));
    if (m <= sse_start) {
        throw InsufficientDataError("effective sample is empty after trimming");
    }
    const std::size_t n_effective = m - sse_start;

    const std::size_t dim = static_cast<std::size_t>(order.param_count());
    std::vector<double> start(dim, 0.0);
    start[0] = vector_mean(w);

    std::vector<double> e_buf;
    auto objective = [&](std::span<const double> params) {
        return penalized_objective(w, order, sse_start, config.stationarity_penalty, params,
                                   e_buf);
    };

    SimplexOptions opts;
    opts.max_iterations = config.max_optimizer_iterations;
    opts.tolerance = config.convergence_tolerance;

    Rng jitter(config.seed);
    bool have_best = false;
    std::vector<double> best_params;
    double best_objective = std::numeric_limits<double>::infinity();
    double best_seen = std::numeric_limits<double>::infinity();

    for (int attempt = 0; attempt <= std::max(0, config.restarts); ++attempt) {
        std::vector<double> s = start;
        if (attempt > 0) {
            for (std::size_t i = 0; i < dim; ++i) {
                s[i] += 0.25 * (1.0 + std::abs(start[i])) * jitter.next_uniform(-1.0, 1.0);
            }
        }
        const SimplexResult res = minimize_simplex(objective, s, opts);
        best_seen = std::min(best_seen, res.value);
        if (!res.converged || !std::isfinite(res.value)) continue;

        const std::span<const double> pr(res.point);
        const bool admissible =
            root_violation(pr.subspan(1, static_cast<std::size_t>(p)), -1.0) == 0.0 &&
            root_violation(pr.subspan(1 + static_cast<std::size_t>(p),
                                      static_cast<std::size_t>(q)),
                           1.0) == 0.0;
        if (admissible && res.value < best_objective) {
            best_objective = res.value;
            best_params = res.point;
            have_best = true;
        }
    }

    if (!have_best) {
        throw FitFailedError("optimizer failed to converge to an admissible model for order (" +
                                 std::to_string(p) + "," + std::to_string(d) + "," +
                                 std::to_string(q) + ")",
                             best_seen);
    }

    ArimaModel model;
    model.order = order;
    model.intercept = best_params[0];
    model.ar_coeffs.assign(best_params.begin() + 1, best_params.begin() + 1 + p);
    model.ma_coeffs.assign(best_params.begin() + 1 + p, best_params.end());
    model.n_effective = n_effective;
    model.sigma2 = std::max(best_objective / static_cast<double>(n_effective), kSigma2Floor);
    model.log_likelihood = concentrated_log_likelihood(model.sigma2, n_effective);
    return model;
}

}  // namespace detail

ArimaModel fit(const TimeSeries& series, const ArimaOrder& order, const FitConfig& config) {
    return detail::fit_trimmed(series, order, config, static_cast<std::size_t>(order.p));
}

std::vector<double> forecast(const ArimaModel& model, const TimeSeries& history, int horizon) {
    if (horizon < 1) throw InvalidParameterError("forecast horizon must be positive");
    const auto& [p, d, q] = model.order;
    const std::size_t n = history.size();
    if (n <= static_cast<std::size_t>(p + d)) {
        throw InsufficientDataError("forecast needs history length > p + d");
    }

    const TimeSeries wseries = difference(history, d);
    const std::size_t m = wseries.size();

    std::vector<double> params;
    params.push_back(model.intercept);
    params.insert(params.end(), model.ar_coeffs.begin(), model.ar_coeffs.end());
    params.insert(params.end(), model.ma_coeffs.begin(), model.ma_coeffs.end());

    std::vector<double> e;
    css_sse(wseries.values(), p, q, static_cast<std::size_t>(p), params, e);

    // Extend w with predictions; future innovations are zero.
    std::vector<double> w = wseries.values();
    w.reserve(m + static_cast<std::size_t>(horizon));
    for (int h = 0; h < horizon; ++h) {
        const std::size_t t = m + static_cast<std::size_t>(h);
        double pred = model.intercept;
        for (int i = 0; i < p; ++i) pred += model.ar_coeffs[static_cast<std::size_t>(i)] *
                                            w[t - 1 - static_cast<std::size_t>(i)];
        for (int j = 0; j < q; ++j) {
            const std::size_t lag = static_cast<std::size_t>(j) + 1;
            if (t >= lag && t - lag < m) {
                pred += model.ma_coeffs[static_cast<std::size_t>(j)] * e[t - lag];
            }
        }
        w.push_back(pred);
    }

    std::vector<double> diffed(w.begin() + static_cast<std::ptrdiff_t>(m), w.end());
    if (d == 0) return diffed;

    const auto& x = history.values();
    const std::span<const double> seeds(x.data() + (n - static_cast<std::size_t>(d)),
                                        static_cast<std::size_t>(d));
    const TimeSeries integrated =
        integrate(TimeSeries(std::move(diffed), history.time_at(n), history.interval_seconds()),
                  seeds, d);
    return integrated.values();
}

std::vector<double> rolling_one_step(const ArimaModel& model, const TimeSeries& train,
                                     const TimeSeries& test) {
    const auto& [p, d, q] = model.order;
    if (test.empty()) throw InputError("rolling_one_step needs a non-empty test series");
    if (train.interval_seconds() != test.interval_seconds() ||
        test.start_time() != train.time_at(train.size())) {
        throw AlignmentError("test series must start exactly one interval after train ends");
    }
    const std::size_t n_train = train.size();
    if (n_train <= static_cast<std::size_t>(p + d)) {
        throw InsufficientDataError("rolling_one_step needs train length > p + d");
    }

    std::vector<double> combined = train.values();
    combined.insert(combined.end(), test.values().begin(), test.values().end());
    const TimeSeries all(std::move(combined), train.start_time(), train.interval_seconds());
    const TimeSeries wseries = difference(all, d);
    const std::span<const double> w = wseries.values();

    std::vector<double> params;
    params.push_back(model.intercept);
    params.insert(params.end(), model.ar_coeffs.begin(), model.ar_coeffs.end());
    params.insert(params.end(), model.ma_coeffs.begin(), model.ma_coeffs.end());
    std::vector<double> e;
    css_sse(w, p, q, static_cast<std::size_t>(p), params, e);

    // Pascal's row for undoing d differences from actual past values:
    // x(t) = w(t') - sum_{k=1..d} (-1)^k C(d,k) x(t-k).
    std::vector<double> binom(static_cast<std::size_t>(d) + 1, 1.0);
    for (int k = 1; k <= d; ++k) {
        binom[static_cast<std::size_t>(k)] =
            binom[static_cast<std::size_t>(k - 1)] * (d - k + 1) / k;
    }

    const auto& x = all.values();
    std::vector<double> out(test.size());
    for (std::size_t i = 0; i < test.size(); ++i) {
        const std::size_t t = n_train + i;                      // index into x
        const std::size_t tw = t - static_cast<std::size_t>(d); // index into w
        double pred = model.intercept;
        for (int k = 0; k < p; ++k) {
            pred += model.ar_coeffs[static_cast<std::size_t>(k)] *
                    w[tw - 1 - static_cast<std::size_t>(k)];
        }
        for (int j = 0; j < q; ++j) {
            const std::size_t lag = static_cast<std::size_t>(j) + 1;
            if (tw >= lag) pred += model.ma_coeffs[static_cast<std::size_t>(j)] * e[tw - lag];
        }
        double sign = 1.0;  // -(-1)^k C(d,k) = +C for odd k, -C for even k
        for (int k = 1; k <= d; ++k) {
            pred += sign * binom[static_cast<std::size_t>(k)] * x[t - static_cast<std::size_t>(k)];
            sign = -sign;
        }
        out[i] = pred;
    }
    return out;
}

TimeSeries simulate_arima(const ArimaOrder& order, const ArimaParams& params, std::size_t n,
                          std::uint64_t seed, std::int64_t start_time,
                          std::int64_t interval_seconds) {
    check_order_nonnegative(order);
    if (n == 0) throw InvalidParameterError("simulation length must be positive");
    if (params.ar.size() != static_cast<std::size_t>(order.p) ||
        params.ma.size() != static_cast<std::size_t>(order.q)) {
        throw InvalidParameterError("coefficient counts must match the order");
    }
    if (params.sigma2 < 0.0) throw InvalidParameterError("sigma2 must be non-negative");
    if (min_ar_root_modulus(params.ar) <= 1.0) {
        throw InvalidParameterError("AR polynomial is not stationary");
    }
    if (min_ma_root_modulus(params.ma) <= 1.0) {
        throw InvalidParameterError("MA polynomial is not invertible");
    }

    const int p = order.p;
    const int q = order.q;
    const std::size_t burn = static_cast<std::size_t>(
        std::max(200, 10 * (p + q)));
    const std::size_t total = burn + n;

    Rng rng(seed);
    const double sigma = std::sqrt(params.sigma2);
    std::vector<double> eps(total), w(total);
    for (std::size_t t = 0; t < total; ++t) {
        eps[t] = sigma * rng.next_gaussian();
        double v = params.intercept + eps[t];
        for (int i = 0; i < p; ++i) {
            const std::size_t lag = static_cast<std::size_t>(i) + 1;
            if (t >= lag) v += params.ar[static_cast<std::size_t>(i)] * w[t - lag];
        }
        for (int j = 0; j < q; ++j) {
            const std::size_t lag = static_cast<std::size_t>(j) + 1;
            if (t >= lag) v += params.ma[static_cast<std::size_t>(j)] * eps[t - lag];
        }
        w[t] = v;
    }

    std::vector<double> x(w.begin() + static_cast<std::ptrdiff_t>(burn), w.end());
    for (int level = 0; level < order.d; ++level) {
        double acc = 0.0;  // zero anchors
        for (double& v : x) {
            acc += v;
            v = acc;
        }
    }
    return TimeSeries(std::move(x), start_time, interval_seconds);
}

}  // namespace flowcast
