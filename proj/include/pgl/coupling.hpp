#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "pgl/enumerate.hpp"
#include "pgl/model.hpp"

// Resampling machinery: couple an instance G to a noisy copy
// G~ = sqrt(1-eta) G + sqrt(eta) G', and quantify how solutions of G fare
// under G~. Throughout, conditional on G the field of tau under G~ at
// constraint a is Normal(sqrt(1-eta) f_a(tau), eta), independent across a.

namespace pgl {

// base instance, an independent fresh copy, and the noise level tying them
struct CoupledInstance {
    DisorderInstance base;
    DisorderInstance fresh;
    double eta = 0.0;  // in (0, 1]

    // weight of the shared component in the equivalent three-part
    // representation G = sqrt(1-l) G1 + sqrt(l) G2, G~ = sqrt(1-l) G1 + sqrt(l) G3
    double shared_lambda() const;
};

CoupledInstance make_coupled(const DisorderInstance& base, double eta, std::uint64_t fresh_seed);

// sqrt(1-eta) base + sqrt(eta) fresh, entrywise; same spec, equal to base
// in distribution
DisorderInstance realize_tilde(const CoupledInstance& c);

// P[tau solves the resampled instance | G], exact closed form: product
// over constraints of the Gaussian mass of the feasible set
double conditional_feasibility(const DisorderInstance& inst, const SpinConfig& tau, double eta);

// Gaussian mass of the feasible set under Normal(mu, sd^2), exposed for
// the closed-form tests
double constraint_mass(const ConstraintSpec& spec, double mu, double sd);

// Every 1-isolated solution has margin at most 2||G||_inf / sqrt(N): a
// flip crosses the boundary, and a flip moves any field by at most that
// much. verify_margin_bound recomputes exact margins and reports breaches
// (there should never be one).
struct MarginBoundReport {
    double bound = 0.0;  // 2 ||G||_inf / sqrt(N)
    std::size_t isolated_checked = 0;
    std::vector<std::uint32_t> violations;  // encodings; expected empty
    bool ok() const { return violations.empty(); }
};

MarginBoundReport verify_margin_bound(const DisorderInstance& inst, const SolutionSet& s);

// Finite-size tolerance for the fragility bound: the largest conditional
// per-constraint retention probability attainable by a field whose slack
// is at most margin_cap, minus 1/2 (clamped at 0). For a half-space this
// is the explicit expression Phi(0) - Phi(-|T|) with
// T = [kappa (1 - sqrt(1-eta)) - sqrt(1-eta) margin_cap] / sqrt(eta);
// for an interval union the same supremum is located numerically.
double fragility_epsilon(const ConstraintSpec& spec, double eta, double margin_cap);

// scan tolerance added on top of 1/2 + epsilon before flagging
inline constexpr double kFragilitySlack = 1e-9;

struct FragilityExceedance {
    std::uint32_t sigma = 0;
    std::uint32_t tau = 0;
    double probability = 0.0;
};

// For every k-isolated sigma and every tau in its Hamming-k ball, the
// retention probability P[tau in S(G~) | G] must stay below 1/2 + epsilon.
struct FragilityReport {
    int k = 0;
    double eta = 0.0;
    double margin_cap = 0.0;  // 2 ||G||_inf / sqrt(N)
    double epsilon = 0.0;
    bool norm_event_ok = false;  // ||G||_inf <= 10 sqrt(log N)
    std::size_t isolated_count = 0;
    std::size_t pairs_checked = 0;
    double max_probability = 0.0;
    std::uint32_t argmax_sigma = 0;
    std::uint32_t argmax_tau = 0;
    std::vector<FragilityExceedance> exceedances;  // expected empty
    bool ok() const { return exceedances.empty(); }
};

FragilityReport fragility_report(const DisorderInstance& inst, const SolutionSet& s, int k, double eta);

// Conditional on G, X_{tau,a} = <g~^a, tau>/sqrt(N) has covariance
// eta * overlap(tau, tau') * 1{a = a'}. Draws fresh copies and compares
// the empirical covariance of the stacked 2M-vector against that.
struct CovarianceCheckReport {
    int m = 0;
    double eta = 0.0;
    double q = 0.0;  // overlap(tau, tau2)
    std::size_t samples = 0;
    std::vector<double> empirical;  // (2M)^2 row-major
    std::vector<double> predicted;
    std::vector<double> se;
    double max_dev_in_se = 0.0;  // max |emp - pred| / SE over entries
    bool ok = false;             // every entry within 4 SE
};

CovarianceCheckReport overlap_covariance_check(const DisorderInstance& inst, const SpinConfig& tau,
                                               const SpinConfig& tau2, double eta, std::size_t samples,
                                               std::uint64_t mc_seed, int threads = 1);

// Two-point correlation of coupled events: for any deterministic event
// E(.) of an instance, P[E(G) and E(G~)] >= P[E(G)]^2. Estimated through
// the shared-component representation with lambda = 1 - sqrt(1-eta);
// ok when the estimate clears the square minus 4 combined SEs.
using InstanceEvent = std::function<bool(const DisorderInstance&)>;

struct JensenReport {
    double eta = 0.0;
    double lambda = 0.0;
    std::size_t trials = 0;
    double p_single = 0.0;  // P[E(G)]
    double p_tilde = 0.0;   // P[E(G~)], equals p_single in law
    double p_joint = 0.0;   // P[E(G) and E(G~)]
    double se_combined = 0.0;  // SE of p_joint - p_single^2
    bool ok = false;
};

JensenReport jensen_check(int n, int m, const ConstraintSpec& spec, double eta, const InstanceEvent& event,
                          std::size_t trials, std::uint64_t seed, int threads = 1);

}  // namespace pgl
