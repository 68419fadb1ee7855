#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace bioplan {

struct KMedoidResult {
    std::vector<int> medoids;      // indices into the input point set
    std::vector<int> assignment;   // point -> position in `medoids`
    std::vector<int> cluster_size;
    double total_dissimilarity = 0;
};

namespace detail {

inline double euclidean(const std::vector<double>& a, const std::vector<double>& b) {
    double sum = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        sum += d * d;
    }
    return std::sqrt(sum);
}

/// Lower-triangular pairwise distance store.
class DistanceMatrix {
public:
    explicit DistanceMatrix(const std::vector<std::vector<double>>& points)
        : n_(static_cast<int>(points.size())), data_(static_cast<size_t>(n_) * (n_ + 1) / 2) {
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j <= i; ++j)
                data_[index(i, j)] = euclidean(points[i], points[j]);
    }

    double operator()(int i, int j) const { return data_[i >= j ? index(i, j) : index(j, i)]; }

private:
    static size_t index(int i, int j) { return static_cast<size_t>(i) * (i + 1) / 2 + j; }
    int n_;
    std::vector<double> data_;
};

}  // namespace detail

/**
 * PAM-style k-medoids: greedy farthest-point initialization (first medoid
 * chosen by the seed, ties to the lowest index) followed by swap local
 * search over a precomputed distance matrix, capped at 100 sweeps.
 * Deterministic given (points, k, seed).
 */
inline KMedoidResult k_medoids(const std::vector<std::vector<double>>& points, int k,
                               uint64_t seed) {
    const int n = static_cast<int>(points.size());
    if (k < 1 || k > n) throw std::invalid_argument("k_medoids: requires 1 <= k <= n_points");

    detail::DistanceMatrix dist(points);

    // farthest-point seeding
    std::vector<int> medoids;
    medoids.reserve(k);
    medoids.push_back(static_cast<int>(seed % static_cast<uint64_t>(n)));
    std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
    while (static_cast<int>(medoids.size()) < k) {
        int last = medoids.back();
        for (int i = 0; i < n; ++i) nearest[i] = std::min(nearest[i], dist(i, last));
        int best = 0;
        double best_d = -1;
        for (int i = 0; i < n; ++i) {
            if (nearest[i] > best_d) {
                best_d = nearest[i];
                best = i;
            }
        }
        medoids.push_back(best);
    }

    auto assign_all = [&](const std::vector<int>& meds, std::vector<int>& assignment) {
        double total = 0;
        assignment.assign(n, 0);
        for (int i = 0; i < n; ++i) {
            double best_d = std::numeric_limits<double>::infinity();
            int best_m = 0;
            for (size_t m = 0; m < meds.size(); ++m) {
                double d = dist(i, meds[m]);
                if (d < best_d) {
                    best_d = d;
                    best_m = static_cast<int>(m);
                }
            }
            assignment[i] = best_m;
            total += best_d;
        }
        return total;
    };

    std::vector<int> assignment;
    double current = assign_all(medoids, assignment);
    std::vector<bool> is_medoid(n, false);
    for (int m : medoids) is_medoid[m] = true;

    // nearest and second-nearest medoid distances make swap deltas O(n)
    std::vector<double> d_nearest(n), d_second(n);
    auto refresh_neighbours = [&] {
        for (int i = 0; i < n; ++i) {
            double first = std::numeric_limits<double>::infinity();
            double second = first;
            for (int m : medoids) {
                double d = dist(i, m);
                if (d < first) {
                    second = first;
                    first = d;
                } else if (d < second) {
                    second = d;
                }
            }
            d_nearest[i] = first;
            d_second[i] = second;
        }
    };
    refresh_neighbours();

    for (int sweep = 0; sweep < 100; ++sweep) {
        bool improved = false;
        for (int m = 0; m < k; ++m) {
            int out = medoids[m];
            for (int candidate = 0; candidate < n; ++candidate) {
                if (is_medoid[candidate]) continue;
                double delta = 0;
                for (int i = 0; i < n; ++i) {
                    double d_cand = dist(i, candidate);
                    if (dist(i, out) > d_nearest[i] + 1e-15) {
                        // point not served by the leaving medoid
                        delta += std::min(d_cand, d_nearest[i]) - d_nearest[i];
                    } else {
                        delta += std::min(d_cand, d_second[i]) - d_nearest[i];
                    }
                }
                if (delta < -1e-12) {
                    is_medoid[out] = false;
                    is_medoid[candidate] = true;
                    medoids[m] = candidate;
                    current += delta;
                    refresh_neighbours();
                    out = candidate;
                    improved = true;
                }
            }
        }
        if (!improved) break;
    }

    KMedoidResult result;
    result.total_dissimilarity = assign_all(medoids, result.assignment);
    result.medoids = medoids;
    result.cluster_size.assign(k, 0);
    for (int a : result.assignment) ++result.cluster_size[a];
    return result;
}

/// Within-cluster dissimilarity of an arbitrary medoid choice (for checks).
inline double medoid_cost(const std::vector<std::vector<double>>& points,
                          const std::vector<int>& medoids) {
    double total = 0;
    for (const auto& p : points) {
        double best = std::numeric_limits<double>::infinity();
        for (int m : medoids) best = std::min(best, detail::euclidean(p, points[m]));
        total += best;
    }
    return total;
}

}  // namespace bioplan
