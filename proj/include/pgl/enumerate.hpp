#pragma once

#include <cstdint>
#include <vector>

#include "pgl/model.hpp"

namespace pgl {

// Exhaustive ground truth for one instance: every solution encoding in
// ascending order, with its margin alongside.
struct SolutionSet {
    int n = 0;
    std::uint64_t digest = 0;  // instance_digest of the enumerated instance
    std::vector<std::uint32_t> members;
    std::vector<double> margins;  // margins[i] = margin(members[i])

    std::size_t size() const { return members.size(); }
    SpinConfig config(std::size_t i) const { return SpinConfig(members[i], n); }
    bool contains(std::uint32_t bits) const;
    // index of bits in members, or members.size() if absent
    std::size_t index_of(std::uint32_t bits) const;
    std::vector<SpinConfig> configs() const;
};

// Walks the hypercube in binary-reflected Gray order, updating all M fields
// by +/- 2 g_{a,i}/sqrt(N) per step. The walk is cut into fixed 2^16-step
// chunks whose field accumulators are re-initialized from scratch, which
// both bounds float drift and lets chunks run on any number of threads with
// bit-identical output.
SolutionSet enumerate_solutions(const DisorderInstance& inst, int threads = 1);

struct IsolationReport {
    int k = 0;
    std::vector<std::uint8_t> isolated;  // aligned with SolutionSet.members
    std::size_t count = 0;               // number of k-isolated members

    std::vector<std::uint32_t> isolated_members(const SolutionSet& s) const;
};

// sigma is k-isolated iff no other solution lies within Hamming distance k.
// Auto-selects between the two scan strategies below at the documented
// crossover (sum_{j<=k} C(N,j) vs |S|).
IsolationReport classify_isolation(const SolutionSet& s, int k);

// enumerate all masks of weight <= k around each member, look them up
IsolationReport classify_isolation_flipscan(const SolutionSet& s, int k);

// compare all member pairs
IsolationReport classify_isolation_pairwise(const SolutionSet& s, int k);

// counts[j-1] = number of j-isolated members, j = 1..k_max (non-increasing)
std::vector<std::size_t> isolation_counts(const SolutionSet& s, int k_max);

// Hamming distance from each member to its nearest other member;
// n+1 stands for "unique solution" when |S| = 1.
std::vector<int> nearest_other_distance(const SolutionSet& s);

struct ClusterReport {
    int link_distance = 0;
    // each cluster lists member indices ascending; clusters ordered by
    // their smallest member encoding
    std::vector<std::vector<std::uint32_t>> clusters;
    std::vector<int> diameters;  // max intra-cluster Hamming distance

    std::size_t size() const { return clusters.size(); }
};

// connected components of the graph linking members at Hamming distance
// <= link_distance (union-find)
ClusterReport clusters(const SolutionSet& s, int link_distance);

// All corners tau with ||tau - center||_2 <= radius, ascending encodings.
// Depth-first with the near sign first, pruned by accumulated squared
// distance against a suffix lower bound.
std::vector<SpinConfig> candidate_set(const RealVector& center, double radius);

// number of masks of weight 1..k over n bits (flip-scan work estimate)
std::uint64_t ball_size(int n, int k);

// the masks themselves, weight 1..k, ascending weight then value; XOR any
// of them into an encoding to walk its punctured Hamming ball
std::vector<std::uint32_t> hamming_ball_masks(int n, int k);

}  // namespace pgl
