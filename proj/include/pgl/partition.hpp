#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pgl/algorithms.hpp"
#include "pgl/enumerate.hpp"
#include "pgl/errors.hpp"
#include "pgl/model.hpp"
#include "pgl/rng.hpp"

namespace pgl {

// Nonnegative weights plus their cached sum; the greedy splitters below
// consume entries strictly in input order.
struct WeightVector {
    std::vector<double> p;
    double total = 0.0;

    // throws PreconditionError on a negative entry
    explicit WeightVector(std::vector<double> weights);
};

enum class PartitionCase {
    ThirdsPrefix,  // balanced greedy prefix, sum1 in [R/3, 2R/3]
    ThirdsHeavy,   // the crossing item alone outweighs R/3
    Halves,        // greedy prefix stopping at 0.49 R
    EvenOdd,       // exploratory fallback split, no weight guarantee
};

struct PartitionResult {
    std::vector<int> c1, c2;  // disjoint, ascending, together cover all indices
    double sum1 = 0.0, sum2 = 0.0;
    PartitionCase fired = PartitionCase::ThirdsPrefix;
};

// Split into two groups each holding at least a third of the total weight
// (so sum1 * sum2 >= 2 R^2 / 9). Requires total >= 0.8 and every entry
// <= 0.51; throws PreconditionError otherwise. Walk the entries in order
// until the running sum first reaches R/3 at item j: if the prefix through
// j stays <= 2R/3 it becomes c1, otherwise item j alone is heavy enough
// and becomes c1 by itself.
PartitionResult partition_thirds(const WeightVector& w);

// Split into two groups each holding at least 0.49 of the total weight.
// Requires total > 0 and every entry <= total/100; the greedy prefix stops
// as soon as it reaches 0.49 R, so sum1 lands in [0.49 R, 0.5 R].
PartitionResult partition_halves(const WeightVector& w);

// Random inputs satisfying the respective preconditions, for property tests
// and the partition-test experiment. Thirds: 2..40 entries drawn in
// (0, 0.51), redrawn until the sum reaches 0.8. Halves: 130..300 entries in
// (0.9, 1.1), always valid.
WeightVector random_thirds_weights(RngStream& rs);
WeightVector random_halves_weights(RngStream& rs);

// Lower-triangular L (row-major, dim x dim) with L L^T = mat, accepting
// positive semidefinite input: a pivot within pivot_tol of zero zeroes its
// column, a pivot below -pivot_tol throws PreconditionError. Also throws
// on an asymmetric matrix.
std::vector<double> cholesky_psd(const std::vector<double>& mat, int dim,
                                 double pivot_tol = 1e-10);

// eigenvectors stored column-wise: mat = V diag(values) V^T with
// V[i*dim + j] the i-th component of eigenvector j; values ascending
struct EigenSymm {
    std::vector<double> values;
    std::vector<double> vectors;
};

// cyclic Jacobi rotations; exact for the small dense matrices used here
EigenSymm jacobi_eigensymm(std::vector<double> mat, int dim);

// Conjunction of one-sided threshold tests on a fixed coordinate subset:
// increasing means every listed coordinate must reach its threshold from
// above (x >= t), decreasing means from below (x <= t).
struct ThresholdEvent {
    std::vector<int> coords;
    std::vector<double> thresholds;
    bool increasing = true;

    bool holds(const std::vector<double>& x) const;
};

// Monte Carlo estimate of P[A and B] - P[A] P[B] for two same-direction
// threshold events of a Gaussian vector whose covariance matrix has no
// negative entry. Such events are positively correlated, so gap >= -3 se
// is a theorem check, not a tunable.
struct PittReport {
    int dim = 0;
    std::uint64_t samples = 0;
    double p_a = 0.0, p_b = 0.0, p_joint = 0.0;
    double gap = 0.0;
    double se = 0.0;  // delta-method standard error of the gap estimate

    bool ok3() const { return gap >= -3.0 * se; }
    bool ok5() const { return gap >= -5.0 * se; }
};

// cov is row-major dim x dim; throws PreconditionError on an asymmetric or
// non-PSD matrix, any negative covariance entry, mixed event directions,
// or an out-of-range event coordinate. Sample s draws its Gaussian via
// normal_at(derive_key(seed, s), coordinate), so results are independent
// of the thread count.
PittReport pitt_check(const std::vector<double>& cov, const std::vector<double>& mean,
                      const ThresholdEvent& event_a, const ThresholdEvent& event_b,
                      std::uint64_t samples, std::uint64_t seed, int threads = 1);

// A randomly generated admissible input for pitt_check: dimension 2..8,
// Wishart covariance repaired to the admissible cone (negative entries
// clipped to zero, eigenvalues floored at zero, entrywise nonnegativity
// re-verified; redrawn on failure), plus two same-direction events with
// per-coordinate hit probabilities bounded away from 0 and 1.
struct PittSetup {
    int dim = 0;
    std::vector<double> mean, cov;
    ThresholdEvent event_a, event_b;
    int repair_attempts = 0;  // redraws needed before the repair stuck
};

PittSetup random_pitt_setup(std::uint64_t seed);

// Which interval boundaries a constraint can feel near sigma_star: side -1
// means the field sits within `threshold` above a left endpoint (the
// feasibility test there is field >= endpoint), +1 within `threshold`
// below a right endpoint (field <= endpoint), 0 ambiguous or slack.
struct ActiveSideReport {
    double threshold = 0.0;
    std::size_t ball_size = 0;
    std::vector<int> rel_minus, rel_plus;     // constraint indices, ascending
    std::vector<int> side;                    // per constraint: -1 / +1 / 0
    std::vector<double> side_endpoint;        // endpoint value backing the side test (NaN if side 0)
    std::vector<std::vector<int>> endpoints_hit;  // per constraint: endpoint ids (2j left, 2j+1
                                                  // right of interval j) within threshold of the
                                                  // field for some ball member
    double drift = 0.0;   // max |field(tau) - field(sigma_star)| over ball x constraints
    bool unique_side = false;    // every relevant constraint stays near exactly one endpoint
    bool widened_unique = false; // same scan with the window widened by drift
};

// Scan every ball member's fields against every interval endpoint. Requires
// an IntervalUnion spec, a feasible sigma_star, and sigma_star in the ball;
// threshold <= 0 selects the default 5 / ln N.
ActiveSideReport active_side_analysis(const DisorderInstance& inst, const SpinConfig& sigma_star,
                                      const std::vector<SpinConfig>& ball, double threshold = 0.0);

// Positive root of 2 s^2 / 9 = 1 - s, the ceiling that the resampling
// pipeline compares its singleton frequency against: (3 sqrt(17) - 9) / 4.
double bound_root();

// Everything the resampling pipeline measured, with integer trial counts
// kept alongside the derived frequencies so identities like
// sum_tau p_tau = s_hat stay exact.
struct PipelineReport {
    std::uint64_t base_digest = 0;
    std::string algorithm_id;
    std::uint64_t omega = 0;
    double eta = 0.0;
    int k = 0;
    double rho_budget = 0.0;
    std::uint64_t samples = 0;

    RealVector algo_output;
    double locate_radius = 0.0;           // sqrt(k)/3
    bool located = false;
    std::optional<SpinConfig> sigma_star; // nearest k-isolated solution, if within reach
    double sigma_star_distance = kInfinity;

    std::vector<SpinConfig> cand;  // closed l2 ball of cand_radius around algo_output
    double cand_radius = 0.0;
    int cand_diameter = 0;         // max pairwise Hamming distance
    double q_min = 1.0;            // min pairwise overlap
    bool q_nonneg = true;

    std::vector<std::uint32_t> trial_counts;     // per resampling: |feasible members|
    std::vector<std::uint64_t> singleton_counts; // per member: trials where it was the unique one
    std::uint64_t zero_trials = 0, singleton_trials = 0, ge2_trials = 0;

    double s_hat = 0.0, s_se = 0.0;
    std::vector<double> p_tau;  // singleton_counts / samples, summing to s_hat exactly
    double max_p_tau = 0.0;

    bool hypotheses_met = false;  // s_hat >= 0.8 and max_p_tau <= 0.51
    bool partition_ran = false;
    bool exploratory = false;     // split came from the even/odd fallback
    std::optional<PartitionResult> partition;

    bool active_mode = false;     // interval-union spec: events use side tests
    std::optional<ActiveSideReport> active;
    bool event_machinery_ok = false;
    std::string machinery_note;

    std::uint64_t e1_count = 0, e2_count = 0, joint_count = 0;
    std::uint64_t phase4_ge2_count = 0, both_count = 0;
    double e1_hat = 0.0, e2_hat = 0.0, joint_hat = 0.0;
    double e1_se = 0.0, e2_se = 0.0, joint_se = 0.0;
    double pitt_gap = 0.0, pitt_se = 0.0;
    double phase4_ge2_hat = 0.0, ge2_se = 0.0;
    bool pitt_ok = true;  // joint >= e1 * e2 - 3 se (vacuously true if the machinery never ran)
    bool ge2_ok = true;   // P[count >= 2] >= joint - 3 se on the fresh samples

    double final_lhs = 0.0, final_rhs = 0.0, final_se = 0.0;
    bool final_ok = true;   // 1 - s_hat >= 2 s_hat^2 / 9 - 3 se
    double root = 0.0;
    bool below_root = true; // s_hat <= root + 3 binomial se
    std::string verdict_note;
};

// End-to-end resampling study of one instance:
//   1. run the algorithm, locate the nearest k-isolated solution within
//      sqrt(k)/3 (the run is reported as unlocated, not aborted, when none
//      is in reach);
//   2. collect CAND, the spin configurations within sqrt(k)/3 + rho_budget
//      of the algorithm output;
//   3. over `samples` re-noised instances (mixing weight eta), count the
//      feasible members of CAND exactly; s_hat is the frequency of exactly
//      one survivor and p_tau the per-member share of those singletons;
//   4. when the split hypotheses hold (or exploratory_split forces an
//      even/odd split), estimate P[some c1 member feasible],
//      P[some c2 member feasible] and their conjunction on fresh samples
//      and check the positive-correlation and count>=2 inequalities;
//   5. check 1 - s_hat >= 2 s_hat^2 / 9 - 3 se and compare against
//      bound_root().
// Resampling t of phase 3 draws fresh entry (a, i) at
// normal_at(derive_key(derive_key(omega, 101), t), a*N + i); phase 4 uses
// stream 102. Results are bit-identical for every thread count.
// Throws CapacityError for N > 24, PreconditionError for bad parameters.
PipelineReport hardness_pipeline(const DisorderInstance& inst, const std::string& algorithm_id,
                                 std::uint64_t omega, double eta, int k, double rho_budget,
                                 std::uint64_t samples, int threads = 1,
                                 bool exploratory_split = false);

}  // namespace pgl
