#include "flowcast/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "flowcast/errors.hpp"

namespace flowcast {

SimplexResult minimize_simplex(const std::function<double(std::span<const double>)>& objective,
                               std::span<const double> start, const SimplexOptions& options) {
    const std::size_t dim = start.size();
    if (dim == 0) throw InvalidParameterError("simplex start point must be non-empty");

    // dim+1 vertices; vertex 0 is the start, vertex i offsets coordinate i-1.
    std::vector<std::vector<double>> vertex(dim + 1, std::vector<double>(start.begin(), start.end()));
    for (std::size_t i = 0; i < dim; ++i) vertex[i + 1][i] += options.initial_edge;

    std::vector<double> value(dim + 1);
    for (std::size_t i = 0; i <= dim; ++i) value[i] = objective(vertex[i]);

    std::vector<std::size_t> rank(dim + 1);
    std::iota(rank.begin(), rank.end(), std::size_t{0});
    auto sort_rank = [&] {
        std::stable_sort(rank.begin(), rank.end(),
                         [&](std::size_t a, std::size_t b) { return value[a] < value[b]; });
    };

    std::vector<double> centroid(dim), candidate(dim);
    SimplexResult result;

    for (int iter = 0; iter < options.max_iterations; ++iter) {
        sort_rank();
        const std::size_t best = rank.front();
        const std::size_t worst = rank.back();
        const std::size_t second_worst = rank[dim - 1];
        result.iterations = iter + 1;

        const double spread = std::abs(value[worst] - value[best]);
        if (spread <= options.tolerance * (std::abs(value[best]) + options.tolerance)) {
            result.converged = true;
            break;
        }

        // Centroid of all vertices except the worst.
        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i <= dim; ++i) {
            if (i == worst) continue;
            for (std::size_t k = 0; k < dim; ++k) centroid[k] += vertex[i][k];
        }
        for (std::size_t k = 0; k < dim; ++k) centroid[k] /= static_cast<double>(dim);

        auto blend = [&](double coeff) {
            for (std::size_t k = 0; k < dim; ++k) {
                candidate[k] = centroid[k] + coeff * (vertex[worst][k] - centroid[k]);
            }
        };

        blend(-options.reflection);
        const double reflected = objective(candidate);

        if (reflected < value[best]) {
            std::vector<double> reflected_point = candidate;
            blend(-options.reflection * options.expansion);
            const double expanded = objective(candidate);
            if (expanded < reflected) {
                vertex[worst] = candidate;
                value[worst] = expanded;
            } else {
                vertex[worst] = std::move(reflected_point);
                value[worst] = reflected;
            }
            continue;
        }
        if (reflected < value[second_worst]) {
            vertex[worst] = candidate;
            value[worst] = reflected;
            continue;
        }

        // Contract toward the better of {worst, reflected}.
        if (reflected < value[worst]) {
            blend(-options.reflection * options.contraction);
        } else {
            blend(options.contraction);
        }
        const double contracted = objective(candidate);
        if (contracted < std::min(reflected, value[worst])) {
            vertex[worst] = candidate;
            value[worst] = contracted;
            continue;
        }

        // Shrink everything toward the best vertex.
        for (std::size_t i = 0; i <= dim; ++i) {
            if (i == best) continue;
            for (std::size_t k = 0; k < dim; ++k) {
                vertex[i][k] = vertex[best][k] + options.shrink * (vertex[i][k] - vertex[best][k]);
            }
            value[i] = objective(vertex[i]);
        }
    }

    sort_rank();
    result.point = vertex[rank.front()];
    result.value = value[rank.front()];
    return result;
}

}  // namespace flowcast
