#include "flowcast/selection.hpp"

#include <cmath>
#include <string>

#include "flowcast/errors.hpp"

namespace flowcast {

double bic(double log_likelihood, int k, std::size_t n) {
    if (k < 1) throw InvalidParameterError("bic parameter count must be positive");
    if (n < 1) throw InvalidParameterError("bic sample size must be positive");
    return static_cast<double>(k) * std::log(static_cast<double>(n)) - 2.0 * log_likelihood;
}

SelectionResult grid_search(const TimeSeries& series, int p_max, int q_max, int d,
                            const FitConfig& config) {
    if (p_max < 0 || q_max < 0) throw InvalidParameterError("grid bounds must be non-negative");
    if (d < 0) throw InvalidParameterError("d must be non-negative");

    const std::size_t sse_start = static_cast<std::size_t>(p_max + q_max);

    SelectionResult result;
    result.k_rule = "k = p + q + 2 (intercept and innovation variance)";
    result.table.reserve(static_cast<std::size_t>((p_max + 1) * (q_max + 1)));

    bool have_chosen = false;
    double chosen_bic = 0.0;

    for (int p = 0; p <= p_max; ++p) {
        for (int q = 0; q <= q_max; ++q) {
            const ArimaOrder order{p, d, q};
            GridEntry entry{order, std::nullopt, {}};
            try {
                ArimaModel model = detail::fit_trimmed(series, order, config, sse_start);
                const int k = p + q + 2;
                const double value = bic(model.log_likelihood, k, model.n_effective);
                entry.bic = value;
                result.n = model.n_effective;  // identical for every non-failed cell
                // Ties break toward smaller p+q, then smaller p; the (p, q)
                // scan order makes strict comparison sufficient for the
                // second key, so only p+q needs an explicit check.
                const bool better =
                    !have_chosen || value < chosen_bic ||
                    (value == chosen_bic && p + q < result.chosen.p + result.chosen.q);
                if (better) {
                    have_chosen = true;
                    chosen_bic = value;
                    result.chosen = order;
                    result.chosen_model = std::move(model);
                }
            } catch (const Error& e) {
                entry.failure = e.what();
            }
            result.table.push_back(std::move(entry));
        }
    }

    if (!have_chosen) {
        throw SelectionFailedError("every candidate in the (p,q) grid failed to fit");
    }
    return result;
}

}  // namespace flowcast
