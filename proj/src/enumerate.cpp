#include "pgl/enumerate.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "pgl/parallel.hpp"

namespace pgl {

bool SolutionSet::contains(std::uint32_t bits) const {
    return std::binary_search(members.begin(), members.end(), bits);
}

std::size_t SolutionSet::index_of(std::uint32_t bits) const {
    const auto it = std::lower_bound(members.begin(), members.end(), bits);
    if (it == members.end() || *it != bits) return members.size();
    return static_cast<std::size_t>(it - members.begin());
}

std::vector<SpinConfig> SolutionSet::configs() const {
    std::vector<SpinConfig> out;
    out.reserve(members.size());
    for (std::uint32_t b : members) out.emplace_back(b, n);
    return out;
}

namespace {

constexpr std::uint64_t kGrayChunk = 1ull << 16;  // drift rebase interval

inline std::uint32_t gray(std::uint64_t t) {
    return static_cast<std::uint32_t>(t ^ (t >> 1));
}

struct ChunkHits {
    std::vector<std::uint32_t> members;
    std::vector<double> margins;
};

// min slack over constraints; feasible iff >= 0
inline double min_slack(const ConstraintSpec& spec, const std::vector<double>& f) {
    double m = kInfinity;
    for (double v : f) {
        const double s = signed_slack(spec, v);
        if (s < m) m = s;
    }
    return m;
}

}  // namespace

SolutionSet enumerate_solutions(const DisorderInstance& inst, int threads) {
    validate_spec(inst.spec);
    const int n = inst.n;
    const int m = inst.m;
    if (n < 1 || n > kMaxSpins) throw DimensionError("enumerate_solutions: n must be in [1,32]");

    const std::uint64_t total = 1ull << n;
    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
    const std::size_t n_chunks = chunk_count(0, total, kGrayChunk);
    std::vector<ChunkHits> hits(n_chunks);

    for_chunks(0, total, kGrayChunk, threads, [&](std::size_t ci, std::uint64_t lo, std::uint64_t hi) {
        ChunkHits& out = hits[ci];
        std::uint32_t enc = gray(lo);
        SpinConfig cur(enc, n);

        // fresh accumulators at the chunk head; everything after is incremental.
        // Membership comes from the walk, but stored margins are recomputed
        // from scratch so margins[i] == margin(members[i]) bit-for-bit.
        std::vector<double> f = fields(inst, cur);
        double slack = min_slack(inst.spec, f);
        if (slack >= 0.0) {
            out.members.push_back(enc);
            out.margins.push_back(margin(inst, cur));
        }
        for (std::uint64_t t = lo + 1; t < hi; ++t) {
            const int j = std::countr_zero(t);
            enc ^= (1u << j);
            const double delta = (enc >> j & 1u ? 2.0 : -2.0) * inv_sqrt_n;
            const double* col = inst.g.data() + j;
            for (int a = 0; a < m; ++a) f[a] += delta * col[static_cast<std::size_t>(a) * n];
            slack = min_slack(inst.spec, f);
            if (slack >= 0.0) {
                out.members.push_back(enc);
                out.margins.push_back(margin(inst, SpinConfig(enc, n)));
            }
        }
    });

    SolutionSet s;
    s.n = n;
    s.digest = instance_digest(inst);
    std::size_t count = 0;
    for (const auto& h : hits) count += h.members.size();
    s.members.reserve(count);
    s.margins.reserve(count);
    for (const auto& h : hits) {
        s.members.insert(s.members.end(), h.members.begin(), h.members.end());
        s.margins.insert(s.margins.end(), h.margins.begin(), h.margins.end());
    }

    // chunks visit interleaved encodings; canonical order is ascending
    std::vector<std::size_t> perm(s.members.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::sort(perm.begin(), perm.end(),
              [&](std::size_t a, std::size_t b) { return s.members[a] < s.members[b]; });
    std::vector<std::uint32_t> sorted_members(s.members.size());
    std::vector<double> sorted_margins(s.members.size());
    for (std::size_t i = 0; i < perm.size(); ++i) {
        sorted_members[i] = s.members[perm[i]];
        sorted_margins[i] = s.margins[perm[i]];
    }
    s.members = std::move(sorted_members);
    s.margins = std::move(sorted_margins);
    return s;
}

std::uint64_t ball_size(int n, int k) {
    // sum_{j=1..k} C(n, j), saturating well below overflow for n <= 32
    std::uint64_t total = 0;
    std::uint64_t binom = 1;
    for (int j = 1; j <= k && j <= n; ++j) {
        binom = binom * static_cast<std::uint64_t>(n - j + 1) / static_cast<std::uint64_t>(j);
        total += binom;
    }
    return total;
}

std::vector<std::uint32_t> hamming_ball_masks(int n, int k) {
    if (n < 1 || n > kMaxSpins) throw DimensionError("hamming_ball_masks: n must be in [1,32]");
    if (k < 0 || k > n) throw PreconditionError("hamming_ball_masks: k must be in [0, n]");
    std::vector<std::uint32_t> out;
    out.reserve(ball_size(n, k));
    const std::uint64_t top = 1ull << n;
    for (int j = 1; j <= k; ++j) {
        std::uint64_t v = (1ull << j) - 1ull;
        while (v < top) {
            out.push_back(static_cast<std::uint32_t>(v));
            const std::uint64_t c = v & (~v + 1);
            const std::uint64_t r = v + c;
            v = (((r ^ v) >> 2) / c) | r;
        }
    }
    return out;
}

std::vector<std::uint32_t> IsolationReport::isolated_members(const SolutionSet& s) const {
    std::vector<std::uint32_t> out;
    for (std::size_t i = 0; i < isolated.size(); ++i)
        if (isolated[i]) out.push_back(s.members[i]);
    return out;
}

namespace {

void check_k(const SolutionSet& s, int k) {
    if (k < 0 || k > s.n) throw PreconditionError("isolation: k must be in [0, n]");
}

// visit every nonzero mask of weight <= k over n bits (Gosper's hack per weight)
template <typename Fn>
void for_masks_up_to(int n, int k, Fn&& fn) {
    const std::uint64_t top = 1ull << n;
    for (int j = 1; j <= k; ++j) {
        if (j > n) break;
        std::uint64_t v = (1ull << j) - 1ull;
        while (v < top) {
            fn(static_cast<std::uint32_t>(v));
            const std::uint64_t c = v & (~v + 1);
            const std::uint64_t r = v + c;
            v = (((r ^ v) >> 2) / c) | r;
        }
    }
}

}  // namespace

IsolationReport classify_isolation_flipscan(const SolutionSet& s, int k) {
    check_k(s, k);
    IsolationReport rep;
    rep.k = k;
    rep.isolated.assign(s.size(), 1);
    for (std::size_t i = 0; i < s.size(); ++i) {
        const std::uint32_t enc = s.members[i];
        bool alone = true;
        for_masks_up_to(s.n, k, [&](std::uint32_t mask) {
            if (alone && s.contains(enc ^ mask)) alone = false;
        });
        rep.isolated[i] = alone ? 1 : 0;
    }
    rep.count = static_cast<std::size_t>(std::count(rep.isolated.begin(), rep.isolated.end(), 1));
    return rep;
}

IsolationReport classify_isolation_pairwise(const SolutionSet& s, int k) {
    check_k(s, k);
    IsolationReport rep;
    rep.k = k;
    rep.isolated.assign(s.size(), 1);
    for (std::size_t i = 0; i < s.size(); ++i) {
        for (std::size_t j = i + 1; j < s.size(); ++j) {
            if (std::popcount(s.members[i] ^ s.members[j]) <= k) {
                rep.isolated[i] = 0;
                rep.isolated[j] = 0;
            }
        }
    }
    rep.count = static_cast<std::size_t>(std::count(rep.isolated.begin(), rep.isolated.end(), 1));
    return rep;
}

IsolationReport classify_isolation(const SolutionSet& s, int k) {
    check_k(s, k);
    // per-member cost: ball lookup count vs one pass over the set
    if (ball_size(s.n, k) < s.size()) return classify_isolation_flipscan(s, k);
    return classify_isolation_pairwise(s, k);
}

std::vector<int> nearest_other_distance(const SolutionSet& s) {
    std::vector<int> d(s.size(), s.n + 1);
    for (std::size_t i = 0; i < s.size(); ++i) {
        for (std::size_t j = i + 1; j < s.size(); ++j) {
            const int h = std::popcount(s.members[i] ^ s.members[j]);
            if (h < d[i]) d[i] = h;
            if (h < d[j]) d[j] = h;
        }
    }
    return d;
}

std::vector<std::size_t> isolation_counts(const SolutionSet& s, int k_max) {
    check_k(s, k_max);
    const std::vector<int> d = nearest_other_distance(s);
    std::vector<std::size_t> counts(static_cast<std::size_t>(k_max), 0);
    for (int k = 1; k <= k_max; ++k) {
        std::size_t c = 0;
        for (int di : d)
            if (di > k) ++c;
        counts[static_cast<std::size_t>(k - 1)] = c;
    }
    return counts;
}

namespace {

struct UnionFind {
    std::vector<std::uint32_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0u); }
    std::uint32_t find(std::uint32_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(std::uint32_t a, std::uint32_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        // smaller index wins so representatives are deterministic
        if (a < b)
            parent[b] = a;
        else
            parent[a] = b;
    }
};

}  // namespace

ClusterReport clusters(const SolutionSet& s, int link_distance) {
    if (link_distance < 1 || link_distance > s.n)
        throw PreconditionError("clusters: link_distance must be in [1, n]");
    ClusterReport rep;
    rep.link_distance = link_distance;
    if (s.size() == 0) return rep;

    UnionFind uf(s.size());
    if (ball_size(s.n, link_distance) < s.size()) {
        for (std::size_t i = 0; i < s.size(); ++i) {
            const std::uint32_t enc = s.members[i];
            for_masks_up_to(s.n, link_distance, [&](std::uint32_t mask) {
                const std::size_t j = s.index_of(enc ^ mask);
                if (j < s.size()) uf.unite(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
            });
        }
    } else {
        for (std::size_t i = 0; i < s.size(); ++i)
            for (std::size_t j = i + 1; j < s.size(); ++j)
                if (std::popcount(s.members[i] ^ s.members[j]) <= link_distance)
                    uf.unite(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
    }

    // members are sorted, so grouping by representative in index order
    // yields clusters ordered by their smallest encoding
    std::vector<std::int64_t> slot(s.size(), -1);
    for (std::size_t i = 0; i < s.size(); ++i) {
        const std::uint32_t r = uf.find(static_cast<std::uint32_t>(i));
        if (slot[r] < 0) {
            slot[r] = static_cast<std::int64_t>(rep.clusters.size());
            rep.clusters.emplace_back();
        }
        rep.clusters[static_cast<std::size_t>(slot[r])].push_back(static_cast<std::uint32_t>(i));
    }

    rep.diameters.reserve(rep.clusters.size());
    for (const auto& cl : rep.clusters) {
        int diam = 0;
        for (std::size_t i = 0; i < cl.size(); ++i)
            for (std::size_t j = i + 1; j < cl.size(); ++j) {
                const int h = std::popcount(s.members[cl[i]] ^ s.members[cl[j]]);
                if (h > diam) diam = h;
            }
        rep.diameters.push_back(diam);
    }
    return rep;
}

std::vector<SpinConfig> candidate_set(const RealVector& center, double radius) {
    const int n = static_cast<int>(center.size());
    if (n < 1 || n > kMaxSpins) throw DimensionError("candidate_set: center length must be in [1,32]");
    if (!(radius >= 0.0)) throw PreconditionError("candidate_set: radius must be >= 0");

    // cheapest possible remaining cost from coordinate i onward; the nearer
    // of {-1,+1} sits at distance | |c_i| - 1 |
    std::vector<double> min_rest(static_cast<std::size_t>(n) + 1, 0.0);
    for (int i = n - 1; i >= 0; --i) {
        const double d = std::fabs(std::fabs(center[i]) - 1.0);
        min_rest[i] = min_rest[i + 1] + d * d;
    }

    const double r2 = radius * radius;
    std::vector<std::uint32_t> found;

    // explicit stack DFS: (coord, partial encoding, accumulated cost)
    struct Node {
        int i;
        std::uint32_t enc;
        double acc;
    };
    std::vector<Node> stack;
    stack.push_back({0, 0u, 0.0});
    while (!stack.empty()) {
        const Node nd = stack.back();
        stack.pop_back();
        if (nd.i == n) {
            found.push_back(nd.enc);
            continue;
        }
        const double c = center[nd.i];
        const int near_sign = c >= 0.0 ? +1 : -1;
        for (int pick = 0; pick < 2; ++pick) {
            const int sgn = pick == 0 ? near_sign : -near_sign;
            const double diff = c - sgn;
            const double acc = nd.acc + diff * diff;
            if (acc + min_rest[nd.i + 1] > r2) continue;
            const std::uint32_t enc = sgn > 0 ? (nd.enc | (1u << nd.i)) : nd.enc;
            stack.push_back({nd.i + 1, enc, acc});
        }
    }

    std::sort(found.begin(), found.end());
    std::vector<SpinConfig> out;
    out.reserve(found.size());
    for (std::uint32_t e : found) out.emplace_back(e, n);
    return out;
}

}  // namespace pgl
