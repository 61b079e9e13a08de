#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "pgl/errors.hpp"

namespace pgl {

using RealVector = std::vector<double>;

inline constexpr int kMaxSpins = 32;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// One corner of the hypercube {-1,+1}^N, bit-packed: bit i set means
// spin i is +1. Bits at or above n are always zero, so `bits` doubles as
// a canonical encoding for sorting and hashing.
class SpinConfig {
public:
    SpinConfig() = default;
    SpinConfig(std::uint32_t bits, int n);

    static SpinConfig all_minus(int n) { return SpinConfig(0u, n); }
    static SpinConfig all_plus(int n);
    static SpinConfig from_spins(const std::vector<int>& spins);

    int n() const { return n_; }
    std::uint32_t bits() const { return bits_; }
    int spin(int i) const { return (bits_ >> i) & 1u ? +1 : -1; }

    SpinConfig flipped(int i) const { return SpinConfig(bits_ ^ (1u << i), n_); }
    RealVector to_real() const;

    friend bool operator==(const SpinConfig& a, const SpinConfig& b) {
        return a.n_ == b.n_ && a.bits_ == b.bits_;
    }

private:
    std::uint32_t bits_ = 0;
    int n_ = 0;
};

// Feasible set for one constraint, in units of the normalized field
// <g^a, sigma>/sqrt(N). Closed boundaries throughout.
struct HalfSpace {
    double kappa = 0.0;  // feasible iff field >= kappa
};

struct IntervalUnion {
    // sorted, pairwise disjoint, finite: a_1 < b_1 < a_2 < ... < b_L
    std::vector<std::pair<double, double>> intervals;
};

using ConstraintSpec = std::variant<HalfSpace, IntervalUnion>;

// throws PreconditionError unless the interval list is sorted, disjoint,
// finite and nonempty
void validate_spec(const ConstraintSpec& spec);

bool feasible_value(const ConstraintSpec& spec, double field);

// Signed distance from `field` to the infeasible region: >= 0 inside the
// feasible set (distance to its boundary from within), < 0 outside
// (negative distance to the feasible set).
double signed_slack(const ConstraintSpec& spec, double field);

// all interval endpoints (kappa alone for a half-space), ascending
std::vector<double> spec_endpoints(const ConstraintSpec& spec);

// M x N Gaussian disorder plus the constraint spec it is tested against.
struct DisorderInstance {
    int n = 0;
    int m = 0;
    std::uint64_t seed = 0;
    ConstraintSpec spec = HalfSpace{0.0};
    std::vector<double> g;  // row-major, g[a*n + i]

    double entry(int a, int i) const { return g[static_cast<std::size_t>(a) * n + i]; }
    std::span<const double> row(int a) const {
        return {g.data() + static_cast<std::size_t>(a) * n, static_cast<std::size_t>(n)};
    }
};

// i.i.d. standard normal entries, entry (a,i) drawn at counter a*N+i of the
// seed's stream; bit-exact regeneration for a given (n, m, seed).
DisorderInstance sample_disorder(int n, int m, std::uint64_t seed, const ConstraintSpec& spec);

// wrap explicit entries (tests, couplings); seed is recorded verbatim
DisorderInstance make_instance(int n, int m, std::vector<double> entries, const ConstraintSpec& spec,
                               std::uint64_t seed = 0);

// normalized fields: f_a = <g^a, sigma>/sqrt(N), length M
RealVector fields(const DisorderInstance& inst, const SpinConfig& sigma);

bool is_solution(const DisorderInstance& inst, const SpinConfig& sigma);

// min over constraints of signed_slack(spec, f_a); +infinity when M = 0.
// margin >= 0 iff is_solution.
double margin(const DisorderInstance& inst, const SpinConfig& sigma);

int hamming(const SpinConfig& a, const SpinConfig& b);

// squared Euclidean distance between corners; exactly 4 * hamming
double l2_sq(const SpinConfig& a, const SpinConfig& b);

// ||x - sigma||_2 minimized over the set; +infinity for an empty set
double dist_to_set(const RealVector& x, const std::vector<SpinConfig>& set);

double l2_dist(const RealVector& x, const SpinConfig& sigma);

// overlap q = 1 - 2 d_H / N, the cosine between corners
double overlap(const SpinConfig& a, const SpinConfig& b);

// max |g_{a,i}|; 0 when M = 0
double norm_inf(const DisorderInstance& inst);

// FNV-1a 64-bit over a canonical little-endian serialization of
// (n, m, seed, spec, entries); stable across platforms and runs
std::uint64_t instance_digest(const DisorderInstance& inst);

// FNV-1a 64-bit over raw bytes (shared by the instance digest and the
// harness file digest)
std::uint64_t fnv1a64(const unsigned char* data, std::size_t len);

std::string spec_to_string(const ConstraintSpec& spec);

}  // namespace pgl
