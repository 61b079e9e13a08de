#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pgl/coupling.hpp"
#include "pgl/enumerate.hpp"
#include "pgl/model.hpp"

namespace pgl {

using RealVector = std::vector<double>;

// Behaviors must be pure in (instance, omega) and map into [-1,1]^N.
using AlgorithmFn = std::function<RealVector(const DisorderInstance&, std::uint64_t)>;

// Registry keyed by string id. "majority" and "greedy" are built in; re-registering
// an id replaces it.
void register_algorithm(const std::string& id, AlgorithmFn fn);
AlgorithmFn algorithm(const std::string& id);  // Error on unknown id
std::vector<std::string> algorithm_ids();

// Coordinate i gets sign of the i-th column sum, sign(0) = +1. M = 0 yields all
// +1 and sets *degenerate when given.
RealVector run_majority(const DisorderInstance& inst, bool* degenerate = nullptr);

struct GreedyTrace {
    SpinConfig config;
    std::size_t iterations = 0;
    bool feasible = false;
    // the targeted constraint's slack never decreased on its own repair step
    bool targeted_never_worsened = true;
};

// Repair loop: take the constraint with the smallest slack, flip the coordinate
// that raises that slack the most (ties to the lowest index), stop at
// feasibility or after max_iters flips.
GreedyTrace run_greedy_repair_from(const DisorderInstance& inst, const SpinConfig& start,
                                   std::size_t max_iters);

// Registry entry point: start from majority with each bit flipped with
// probability 0.05 under omega, then repair.
RealVector run_greedy_repair(const DisorderInstance& inst, std::size_t max_iters,
                             std::uint64_t omega);

// Per-coordinate clamp to [-1,1]; nonexpansive in l2.
RealVector clip(const RealVector& x);

struct StabilityReport {
    double eta = 0.0;
    std::size_t trials = 0;
    std::vector<double> distances;        // per trial, trial order
    double mean_sq_distance = 0.0;
    std::vector<double> quantile_probs;
    std::vector<double> quantiles;
    // survival curve over the distinct observed distances: t = P[d > rho]
    std::vector<std::pair<double, double>> survival;
};

// Per trial: couple (G, G~) at eta and run the algorithm with the SAME omega on
// both sides; d = l2 distance of the outputs. Trial t draws its base seed,
// fresh seed, and omega from derive_key(master_seed, 3t), 3t+1, 3t+2.
StabilityReport measure_stability(const std::string& algorithm_id, std::uint32_t n,
                                  std::uint32_t m, const ConstraintSpec& spec, double eta,
                                  std::size_t trials, std::uint64_t master_seed,
                                  unsigned threads = 1);

struct SuccessMode {
    bool macroscopic = false;
    unsigned k = 1;      // fixed-k variant
    double iota = 0.0;   // macroscopic variant: k = floor(iota*N), radius sqrt(iota*N)/3
    static SuccessMode fixed(unsigned k) { return SuccessMode{false, k, 0.0}; }
    static SuccessMode scaled(double iota) { return SuccessMode{true, 0, iota}; }
};

struct SuccessReport {
    std::size_t trials = 0;
    unsigned k = 0;
    double radius = 0.0;
    double success_fraction = 0.0;
    double isolated_fraction = 0.0;
    double success_se = 0.0;
    double isolated_se = 0.0;
    std::vector<double> dist_to_solutions;  // per trial
    std::vector<double> dist_to_isolated;
};

// Ground truth by full enumeration (N <= 24). Success: the output lies within
// the mode's radius of the solution set; isolated success: within the same
// radius of the k-isolated subset. Trial t uses derive_key(master_seed, 2t)
// for the instance and 2t+1 for omega.
SuccessReport measure_success(const std::string& algorithm_id, std::uint32_t n, std::uint32_t m,
                              const ConstraintSpec& spec, const SuccessMode& mode,
                              std::size_t trials, std::uint64_t master_seed,
                              unsigned threads = 1);

struct Monomial {
    std::vector<std::uint32_t> entries;  // flat matrix indices a*n+i, repetition allowed
    double coeff = 0.0;
};

struct PolynomialOutput {
    std::uint32_t n = 0, m = 0;
    std::vector<std::vector<Monomial>> coords;  // one polynomial per output coordinate
    bool has_c_bound = false;
    double c_bound = 0.0;  // E ||output||^2 <= c_bound * N
    unsigned degree() const;
};

struct PolySensitivityReport {
    double eta = 0.0;
    unsigned degree = 0;
    std::size_t trials = 0;  // 0 in exact mode
    bool exact = false;
    double c_bound = 0.0;
    bool c_estimated = false;
    double measured = 0.0;  // E ||p(G) - p(G~)||^2
    double se = 0.0;
    double bound = 0.0;  // 2 C D eta N
    double measured_clipped = 0.0;  // NaN in exact mode
    bool clipped_le_unclipped = true;
    bool ok = false;  // measured <= bound + 3 se
};

// trials = 0 requests the exact mode (degree <= 1 only): the closed form
// 2(1-sqrt(1-eta)) * sum of squared per-entry coefficients. Otherwise MC with
// coupled matrices; the clipped comparison is checked on every trial. A missing
// c_bound is estimated from 10^4 fresh samples and inflated by 1.2.
PolySensitivityReport poly_noise_sensitivity(const PolynomialOutput& p, double eta,
                                             std::size_t trials, std::uint64_t seed,
                                             unsigned threads = 1);

}  // namespace pgl
