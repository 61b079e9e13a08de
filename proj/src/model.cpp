#include "pgl/model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <sstream>

#include "pgl/rng.hpp"

namespace pgl {

SpinConfig::SpinConfig(std::uint32_t bits, int n) : bits_(bits), n_(n) {
    if (n < 1 || n > kMaxSpins) throw DimensionError("SpinConfig: n must be in [1,32], got " + std::to_string(n));
    if (n < 32) {
        const std::uint32_t mask = (1u << n) - 1u;
        if (bits & ~mask) throw DimensionError("SpinConfig: bits set at or above n");
    }
}

SpinConfig SpinConfig::all_plus(int n) {
    if (n < 1 || n > kMaxSpins) throw DimensionError("SpinConfig: n must be in [1,32]");
    const std::uint32_t bits = n == 32 ? ~0u : (1u << n) - 1u;
    return SpinConfig(bits, n);
}

SpinConfig SpinConfig::from_spins(const std::vector<int>& spins) {
    const int n = static_cast<int>(spins.size());
    if (n < 1 || n > kMaxSpins) throw DimensionError("SpinConfig: n must be in [1,32]");
    std::uint32_t bits = 0;
    for (int i = 0; i < n; ++i) {
        if (spins[i] == 1) {
            bits |= (1u << i);
        } else if (spins[i] != -1) {
            throw PreconditionError("SpinConfig: spins must be +1 or -1");
        }
    }
    return SpinConfig(bits, n);
}

RealVector SpinConfig::to_real() const {
    RealVector v(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i) v[i] = spin(i);
    return v;
}

void validate_spec(const ConstraintSpec& spec) {
    if (const auto* hs = std::get_if<HalfSpace>(&spec)) {
        if (!std::isfinite(hs->kappa)) throw PreconditionError("HalfSpace: kappa must be finite");
        return;
    }
    const auto& iv = std::get<IntervalUnion>(spec).intervals;
    if (iv.empty()) throw PreconditionError("IntervalUnion: needs at least one interval");
    double prev = -kInfinity;
    for (const auto& [a, b] : iv) {
        if (!std::isfinite(a) || !std::isfinite(b)) throw PreconditionError("IntervalUnion: endpoints must be finite");
        if (!(a < b)) throw PreconditionError("IntervalUnion: intervals must satisfy a < b");
        if (!(prev < a)) throw PreconditionError("IntervalUnion: intervals must be sorted and disjoint");
        prev = b;
    }
}

bool feasible_value(const ConstraintSpec& spec, double field) {
    if (const auto* hs = std::get_if<HalfSpace>(&spec)) return field >= hs->kappa;
    for (const auto& [a, b] : std::get<IntervalUnion>(spec).intervals) {
        if (field < a) return false;  // intervals are sorted
        if (field <= b) return true;
    }
    return false;
}

double signed_slack(const ConstraintSpec& spec, double field) {
    if (const auto* hs = std::get_if<HalfSpace>(&spec)) return field - hs->kappa;
    const auto& iv = std::get<IntervalUnion>(spec).intervals;
    double dist_out = kInfinity;
    for (const auto& [a, b] : iv) {
        if (field >= a && field <= b) {
            const double left = field - a;
            const double right = b - field;
            return left < right ? left : right;
        }
        const double d = field < a ? a - field : field - b;
        if (d < dist_out) dist_out = d;
    }
    return -dist_out;
}

std::vector<double> spec_endpoints(const ConstraintSpec& spec) {
    std::vector<double> out;
    if (const auto* hs = std::get_if<HalfSpace>(&spec)) {
        out.push_back(hs->kappa);
        return out;
    }
    for (const auto& [a, b] : std::get<IntervalUnion>(spec).intervals) {
        out.push_back(a);
        out.push_back(b);
    }
    return out;
}

namespace {

void check_shape(int n, int m) {
    if (n < 1 || n > kMaxSpins) throw DimensionError("instance: n must be in [1,32], got " + std::to_string(n));
    if (m < 0) throw DimensionError("instance: m must be >= 0");
}

}  // namespace

DisorderInstance sample_disorder(int n, int m, std::uint64_t seed, const ConstraintSpec& spec) {
    check_shape(n, m);
    validate_spec(spec);
    DisorderInstance inst;
    inst.n = n;
    inst.m = m;
    inst.seed = seed;
    inst.spec = spec;
    inst.g.resize(static_cast<std::size_t>(m) * n);
    for (std::size_t idx = 0; idx < inst.g.size(); ++idx) inst.g[idx] = rng::normal_at(seed, idx);
    return inst;
}

DisorderInstance make_instance(int n, int m, std::vector<double> entries, const ConstraintSpec& spec,
                               std::uint64_t seed) {
    check_shape(n, m);
    validate_spec(spec);
    if (entries.size() != static_cast<std::size_t>(m) * n)
        throw DimensionError("instance: entry count must equal m*n");
    DisorderInstance inst;
    inst.n = n;
    inst.m = m;
    inst.seed = seed;
    inst.spec = spec;
    inst.g = std::move(entries);
    return inst;
}

namespace {

void check_config(const DisorderInstance& inst, const SpinConfig& sigma) {
    if (sigma.n() != inst.n) throw DimensionError("config dimension does not match instance");
}

}  // namespace

RealVector fields(const DisorderInstance& inst, const SpinConfig& sigma) {
    check_config(inst, sigma);
    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(inst.n));
    RealVector f(static_cast<std::size_t>(inst.m));
    for (int a = 0; a < inst.m; ++a) {
        const auto row = inst.row(a);
        double acc = 0.0;
        for (int i = 0; i < inst.n; ++i) acc += row[i] * sigma.spin(i);
        f[a] = acc * inv_sqrt_n;
    }
    return f;
}

bool is_solution(const DisorderInstance& inst, const SpinConfig& sigma) {
    const RealVector f = fields(inst, sigma);
    for (double v : f)
        if (!feasible_value(inst.spec, v)) return false;
    return true;
}

double margin(const DisorderInstance& inst, const SpinConfig& sigma) {
    const RealVector f = fields(inst, sigma);
    double m = kInfinity;
    for (double v : f) {
        const double s = signed_slack(inst.spec, v);
        if (s < m) m = s;
    }
    return m;
}

int hamming(const SpinConfig& a, const SpinConfig& b) {
    if (a.n() != b.n()) throw DimensionError("hamming: dimension mismatch");
    return std::popcount(a.bits() ^ b.bits());
}

double l2_sq(const SpinConfig& a, const SpinConfig& b) {
    return 4.0 * hamming(a, b);
}

double l2_dist(const RealVector& x, const SpinConfig& sigma) {
    if (static_cast<int>(x.size()) != sigma.n()) throw DimensionError("l2_dist: dimension mismatch");
    double acc = 0.0;
    for (int i = 0; i < sigma.n(); ++i) {
        const double d = x[i] - sigma.spin(i);
        acc += d * d;
    }
    return std::sqrt(acc);
}

double dist_to_set(const RealVector& x, const std::vector<SpinConfig>& set) {
    double best = kInfinity;
    for (const auto& sigma : set) {
        const double d = l2_dist(x, sigma);
        if (d < best) best = d;
    }
    return best;
}

double overlap(const SpinConfig& a, const SpinConfig& b) {
    return 1.0 - 2.0 * static_cast<double>(hamming(a, b)) / static_cast<double>(a.n());
}

double norm_inf(const DisorderInstance& inst) {
    double best = 0.0;
    for (double v : inst.g) {
        const double av = std::fabs(v);
        if (av > best) best = av;
    }
    return best;
}

std::uint64_t fnv1a64(const unsigned char* data, std::size_t len) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= data[i];
        h *= 0x100000001B3ULL;
    }
    return h;
}

namespace {

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
    for (int k = 0; k < 4; ++k) out.push_back(static_cast<unsigned char>((v >> (8 * k)) & 0xFF));
}

void put_u64(std::vector<unsigned char>& out, std::uint64_t v) {
    for (int k = 0; k < 8; ++k) out.push_back(static_cast<unsigned char>((v >> (8 * k)) & 0xFF));
}

void put_f64(std::vector<unsigned char>& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    put_u64(out, bits);
}

}  // namespace

std::uint64_t instance_digest(const DisorderInstance& inst) {
    // little-endian field dump, entries row-major last; no padding, so the
    // digest is a pure function of the mathematical content
    std::vector<unsigned char> buf;
    buf.reserve(16 + 8 + inst.g.size() * 8 + 32);
    put_u32(buf, static_cast<std::uint32_t>(inst.n));
    put_u32(buf, static_cast<std::uint32_t>(inst.m));
    put_u64(buf, inst.seed);
    if (const auto* hs = std::get_if<HalfSpace>(&inst.spec)) {
        buf.push_back(0);
        put_f64(buf, hs->kappa);
    } else {
        const auto& iv = std::get<IntervalUnion>(inst.spec).intervals;
        buf.push_back(1);
        put_u32(buf, static_cast<std::uint32_t>(iv.size()));
        for (const auto& [a, b] : iv) {
            put_f64(buf, a);
            put_f64(buf, b);
        }
    }
    for (double v : inst.g) put_f64(buf, v);
    return fnv1a64(buf.data(), buf.size());
}

std::string spec_to_string(const ConstraintSpec& spec) {
    std::ostringstream os;
    os.precision(17);
    if (const auto* hs = std::get_if<HalfSpace>(&spec)) {
        os << "halfspace kappa=" << hs->kappa;
    } else {
        os << "intervals";
        for (const auto& [a, b] : std::get<IntervalUnion>(spec).intervals) os << " [" << a << "," << b << "]";
    }
    return os.str();
}

}  // namespace pgl
