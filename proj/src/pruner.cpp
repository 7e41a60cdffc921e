#include "minplus/pruner.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "minplus/rng.hpp"

namespace minplus {

std::vector<ArgminEntry> argmin_catalog(const QuadSet& s, const Window& w) {
    std::vector<ArgminEntry> catalog;
    catalog.reserve(s.size());
    for (int i = 0; i < s.size(); ++i) {
        auto [point, value] = windowed_argmin(s.member(i), w);
        catalog.push_back({i, std::move(point), value});
    }
    return catalog;
}

ClusterResult cluster(const std::vector<Vec>& points, int k, std::uint64_t seed,
                      int max_iterations) {
    if (points.empty() || k < 1) {
        throw std::invalid_argument("cluster needs points and k >= 1");
    }
    const int npts = static_cast<int>(points.size());

    int distinct = 0;
    for (int i = 0; i < npts; ++i) {
        bool seen = false;
        for (int j = 0; j < i && !seen; ++j) {
            seen = points[i] == points[j];
        }
        if (!seen) ++distinct;
    }
    ClusterResult result;
    result.k_effective = std::min(k, distinct);

    // Farthest-point seeding: first center from the seeded generator, each
    // following center the point farthest from the chosen set (ties to the
    // lowest index).
    SplitMix64 rng(seed);
    std::vector<int> center_idx{static_cast<int>(rng.next() % static_cast<std::uint64_t>(npts))};
    while (static_cast<int>(center_idx.size()) < result.k_effective) {
        int best = -1;
        double best_dist = -1.0;
        for (int i = 0; i < npts; ++i) {
            double d = std::numeric_limits<double>::infinity();
            for (int c : center_idx) {
                d = std::min(d, (points[i] - points[c]).squaredNorm());
            }
            if (d > best_dist) {
                best_dist = d;
                best = i;
            }
        }
        center_idx.push_back(best);
    }
    result.centers.reserve(center_idx.size());
    for (int c : center_idx) result.centers.push_back(points[c]);

    result.assignment.assign(npts, 0);
    for (int iter = 0; iter < max_iterations; ++iter) {
        bool changed = false;
        for (int i = 0; i < npts; ++i) {
            int best = 0;
            double best_dist = std::numeric_limits<double>::infinity();
            for (int c = 0; c < result.k_effective; ++c) {
                const double d = (points[i] - result.centers[c]).squaredNorm();
                if (d < best_dist) {
                    best_dist = d;
                    best = c;
                }
            }
            if (result.assignment[i] != best) {
                result.assignment[i] = best;
                changed = true;
            }
        }
        result.iterations = iter + 1;
        if (!changed && iter > 0) break;

        for (int c = 0; c < result.k_effective; ++c) {
            Vec sum = Vec::Zero(points.front().size());
            int count = 0;
            for (int i = 0; i < npts; ++i) {
                if (result.assignment[i] == c) {
                    sum += points[i];
                    ++count;
                }
            }
            if (count > 0) {
                result.centers[c] = sum / count;  // empty clusters keep their center
            }
        }
    }
    return result;
}

QuadSet prune(const QuadSet& s, const Window& w, const PruneConfig& cfg) {
    if (cfg.max_members < 1) {
        throw std::invalid_argument("prune budget must be >= 1");
    }
    if (s.size() <= cfg.max_members) {
        return s;
    }
    const std::vector<ArgminEntry> catalog = argmin_catalog(s, w);

    std::vector<int> survivors;
    if (cfg.strategy == PruneStrategy::ClusterPrune) {
        std::vector<Vec> points;
        points.reserve(catalog.size());
        for (const auto& e : catalog) points.push_back(e.point);
        const ClusterResult cl = cluster(points, cfg.max_members, cfg.seed, cfg.max_iterations);

        std::vector<int> best_per_cluster(cl.k_effective, -1);
        for (int i = 0; i < static_cast<int>(catalog.size()); ++i) {
            int& best = best_per_cluster[cl.assignment[i]];
            if (best < 0 || catalog[i].value < catalog[best].value) {
                best = i;
            }
        }
        for (int best : best_per_cluster) {
            if (best >= 0) survivors.push_back(best);
        }
    } else {
        std::vector<int> order(catalog.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return catalog[a].value < catalog[b].value;
        });
        survivors.assign(order.begin(), order.begin() + cfg.max_members);
    }

    std::sort(survivors.begin(), survivors.end());  // keep original relative order
    std::vector<QuadForm> kept;
    kept.reserve(survivors.size());
    for (int i : survivors) kept.push_back(s.member(i));
    return QuadSet(std::move(kept));
}

}  // namespace minplus
