#pragma once

#include <functional>
#include <span>
#include <vector>

namespace flowcast {

/// Derivative-free Nelder-Mead simplex minimizer with fixed, deterministic
/// move constants so runs are reproducible bit-for-bit.
struct SimplexOptions {
    double reflection = 1.0;
    double expansion = 2.0;
    double contraction = 0.5;
    double shrink = 0.5;
    /// Edge length of the initial axis-aligned simplex around the start point.
    double initial_edge = 0.1;
    int max_iterations = 2000;
    /// Converged when the objective spread across the simplex falls below
    /// tolerance * (|best| + tolerance).
    double tolerance = 1e-8;
};

struct SimplexResult {
    std::vector<double> point;
    double value = 0.0;
    bool converged = false;
    int iterations = 0;
};

SimplexResult minimize_simplex(const std::function<double(std::span<const double>)>& objective,
                               std::span<const double> start, const SimplexOptions& options = {});

}  // namespace flowcast
