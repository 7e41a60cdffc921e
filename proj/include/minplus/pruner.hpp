#pragma once

#include <cstdint>
#include <vector>

#include "minplus/quadform.hpp"
#include "minplus/window.hpp"

namespace minplus {

enum class PruneStrategy {
    ClusterPrune,  // cluster member argmins, keep the best member per cluster
    ValuePrune,    // keep the members with the lowest windowed-argmin values
};

struct PruneConfig {
    int max_members = 12;
    PruneStrategy strategy = PruneStrategy::ClusterPrune;
    std::uint64_t seed = 1;
    int max_iterations = 100;
};

struct ArgminEntry {
    int index;
    Vec point;
    double value;
};

// Windowed argmin of every member, in member order.
std::vector<ArgminEntry> argmin_catalog(const QuadSet& s, const Window& w);

struct ClusterResult {
    std::vector<int> assignment;  // cluster id per input point
    std::vector<Vec> centers;
    int k_effective = 0;  // reduced when there are fewer distinct points than k
    int iterations = 0;
};

// Lloyd's k-means with farthest-point seeding: the first center is drawn
// from the seeded generator, later centers maximize the distance to the
// chosen set. Deterministic for fixed (points, k, seed).
ClusterResult cluster(const std::vector<Vec>& points, int k, std::uint64_t seed,
                      int max_iterations = 100);

// Projects s onto at most cfg.max_members members. Survivors are original
// members in their original relative order; value ties break to the lowest
// index. ClusterPrune may return fewer members when clusters come out empty.
QuadSet prune(const QuadSet& s, const Window& w, const PruneConfig& cfg);

}  // namespace minplus
