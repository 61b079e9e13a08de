#include "pgl/algorithms.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <mutex>

#include "pgl/parallel.hpp"
#include "pgl/rng.hpp"
#include "pgl/stats.hpp"

namespace pgl {

namespace {

std::mutex& registry_mutex() {
    static std::mutex m;
    return m;
}

std::map<std::string, AlgorithmFn>& registry_map() {
    static std::map<std::string, AlgorithmFn> reg = {
        {"majority",
         [](const DisorderInstance& inst, std::uint64_t) { return run_majority(inst); }},
        {"greedy",
         [](const DisorderInstance& inst, std::uint64_t omega) {
             return run_greedy_repair(inst, 4 * static_cast<std::size_t>(inst.n), omega);
         }},
    };
    return reg;
}

void check_output(const RealVector& x, std::uint32_t n, const std::string& id) {
    if (x.size() != n) throw DimensionError("algorithm '" + id + "' returned wrong length");
    for (double v : x)
        if (!(v >= -1.0 - 1e-12 && v <= 1.0 + 1e-12))
            throw Error("algorithm '" + id + "' left [-1,1]");
}

double l2_diff(const RealVector& x, const RealVector& y) {
    KahanSum acc;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        acc.add(d * d);
    }
    return std::sqrt(acc.value());
}

void check_eta_open(double eta) {
    if (!(eta > 0.0 && eta < 1.0)) throw PreconditionError("eta must lie in (0,1)");
}

}  // namespace

void register_algorithm(const std::string& id, AlgorithmFn fn) {
    std::lock_guard<std::mutex> lock(registry_mutex());
    registry_map()[id] = std::move(fn);
}

AlgorithmFn algorithm(const std::string& id) {
    std::lock_guard<std::mutex> lock(registry_mutex());
    const auto& reg = registry_map();
    const auto it = reg.find(id);
    if (it == reg.end()) throw Error("unknown algorithm id '" + id + "'");
    return it->second;
}

std::vector<std::string> algorithm_ids() {
    std::lock_guard<std::mutex> lock(registry_mutex());
    std::vector<std::string> ids;
    for (const auto& [id, fn] : registry_map()) ids.push_back(id);
    return ids;
}

RealVector run_majority(const DisorderInstance& inst, bool* degenerate) {
    if (degenerate) *degenerate = inst.m == 0;
    RealVector out(inst.n, 1.0);
    if (inst.m == 0) return out;
    for (int i = 0; i < inst.n; ++i) {
        KahanSum col;
        for (int a = 0; a < inst.m; ++a) col.add(inst.entry(a, i));
        out[i] = col.value() < 0.0 ? -1.0 : 1.0;
    }
    return out;
}

GreedyTrace run_greedy_repair_from(const DisorderInstance& inst, const SpinConfig& start,
                                   std::size_t max_iters) {
    if (start.n() != inst.n) throw DimensionError("start config does not match instance");
    GreedyTrace trace{start, 0, false, true};
    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(inst.n));

    RealVector f = fields(inst, trace.config);
    while (true) {
        int worst = -1;
        double worst_slack = kInfinity;
        for (int a = 0; a < inst.m; ++a) {
            const double s = signed_slack(inst.spec, f[a]);
            if (s < worst_slack) {
                worst_slack = s;
                worst = a;
            }
        }
        if (worst < 0 || worst_slack >= 0.0) {
            trace.feasible = true;
            return trace;
        }
        if (trace.iterations == max_iters) break;

        int best_i = -1;
        double best_slack = -kInfinity;
        for (int i = 0; i < inst.n; ++i) {
            const double moved = f[worst] - 2.0 * trace.config.spin(i) * inst.entry(worst, i) * inv_sqrt_n;
            const double s = signed_slack(inst.spec, moved);
            if (s > best_slack) {
                best_slack = s;
                best_i = i;
            }
        }
        if (best_slack < worst_slack - 1e-12) trace.targeted_never_worsened = false;

        const int old_spin = trace.config.spin(best_i);
        for (int a = 0; a < inst.m; ++a) f[a] -= 2.0 * old_spin * inst.entry(a, best_i) * inv_sqrt_n;
        trace.config = trace.config.flipped(best_i);
        ++trace.iterations;
    }
    trace.feasible = false;  // loop only breaks with the worst slack negative
    return trace;
}

RealVector run_greedy_repair(const DisorderInstance& inst, std::size_t max_iters,
                             std::uint64_t omega) {
    const RealVector maj = run_majority(inst);
    std::vector<int> spins(inst.n);
    RngStream perturb(rng::derive_key(omega, 0x6772));
    for (int i = 0; i < inst.n; ++i) {
        spins[i] = maj[i] < 0.0 ? -1 : +1;
        if (perturb.next_uniform() < 0.05) spins[i] = -spins[i];
    }
    return run_greedy_repair_from(inst, SpinConfig::from_spins(spins), max_iters).config.to_real();
}

RealVector clip(const RealVector& x) {
    RealVector out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::min(1.0, std::max(-1.0, x[i]));
    return out;
}

StabilityReport measure_stability(const std::string& algorithm_id, std::uint32_t n,
                                  std::uint32_t m, const ConstraintSpec& spec, double eta,
                                  std::size_t trials, std::uint64_t master_seed,
                                  unsigned threads) {
    check_eta_open(eta);
    if (trials < 100) throw PreconditionError("stability needs at least 100 trials");
    const AlgorithmFn fn = algorithm(algorithm_id);

    StabilityReport rep;
    rep.eta = eta;
    rep.trials = trials;
    rep.distances.resize(trials);

    for_chunks(0, trials, 64, static_cast<int>(threads),
               [&](std::size_t, std::uint64_t lo, std::uint64_t hi) {
                   for (std::uint64_t t = lo; t < hi; ++t) {
                       const auto base = sample_disorder(static_cast<int>(n), static_cast<int>(m),
                                                         rng::derive_key(master_seed, 3 * t), spec);
                       const auto tilde = realize_tilde(
                           make_coupled(base, eta, rng::derive_key(master_seed, 3 * t + 1)));
                       const std::uint64_t omega = rng::derive_key(master_seed, 3 * t + 2);
                       const RealVector x = fn(base, omega);
                       const RealVector y = fn(tilde, omega);
                       check_output(x, n, algorithm_id);
                       check_output(y, n, algorithm_id);
                       rep.distances[t] = l2_diff(x, y);
                   }
               });

    KahanSum sq;
    for (double d : rep.distances) sq.add(d * d);
    rep.mean_sq_distance = sq.value() / static_cast<double>(trials);

    std::vector<double> sorted = rep.distances;
    std::sort(sorted.begin(), sorted.end());
    rep.quantile_probs = {0.0, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99, 1.0};
    for (double q : rep.quantile_probs) rep.quantiles.push_back(quantile_sorted(sorted, q));

    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) continue;  // last of a tie run
        rep.survival.emplace_back(sorted[i],
                                  static_cast<double>(sorted.size() - i - 1) / static_cast<double>(trials));
    }
    return rep;
}

SuccessReport measure_success(const std::string& algorithm_id, std::uint32_t n, std::uint32_t m,
                              const ConstraintSpec& spec, const SuccessMode& mode,
                              std::size_t trials, std::uint64_t master_seed,
                              unsigned threads) {
    if (trials < 100) throw PreconditionError("success needs at least 100 trials");
    if (n > 24) throw CapacityError("N too large for exhaustive ground truth");

    unsigned k = mode.k;
    double radius;
    if (mode.macroscopic) {
        k = static_cast<unsigned>(std::floor(mode.iota * n));
        if (k < 1) throw PreconditionError("iota*N below 1, no isolation scale");
        radius = std::sqrt(mode.iota * n) / 3.0;
    } else {
        if (k < 1) throw PreconditionError("k must be at least 1");
        radius = std::sqrt(static_cast<double>(k)) / 3.0;
    }

    const AlgorithmFn fn = algorithm(algorithm_id);
    SuccessReport rep;
    rep.trials = trials;
    rep.k = k;
    rep.radius = radius;
    rep.dist_to_solutions.resize(trials);
    rep.dist_to_isolated.resize(trials);

    for_chunks(0, trials, 16, static_cast<int>(threads),
               [&](std::size_t, std::uint64_t lo, std::uint64_t hi) {
                   for (std::uint64_t t = lo; t < hi; ++t) {
                       const auto inst = sample_disorder(static_cast<int>(n), static_cast<int>(m),
                                                         rng::derive_key(master_seed, 2 * t), spec);
                       const RealVector x = fn(inst, rng::derive_key(master_seed, 2 * t + 1));
                       check_output(x, n, algorithm_id);
                       const auto s = enumerate_solutions(inst);
                       const auto iso = classify_isolation(s, static_cast<int>(k));
                       std::vector<SpinConfig> iso_configs;
                       for (std::size_t j = 0; j < s.size(); ++j)
                           if (iso.isolated[j]) iso_configs.push_back(s.config(j));
                       rep.dist_to_solutions[t] = dist_to_set(x, s.configs());
                       rep.dist_to_isolated[t] = dist_to_set(x, iso_configs);
                   }
               });

    std::size_t hits = 0, iso_hits = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        const bool hit = rep.dist_to_solutions[t] <= radius;
        const bool iso_hit = rep.dist_to_isolated[t] <= radius;
        // the isolated set is a subset, so with one shared radius this cannot fire
        if (iso_hit && !hit) throw Error("isolated success without success at equal radii");
        hits += hit;
        iso_hits += iso_hit;
    }
    rep.success_fraction = static_cast<double>(hits) / static_cast<double>(trials);
    rep.isolated_fraction = static_cast<double>(iso_hits) / static_cast<double>(trials);
    rep.success_se = binomial_se(rep.success_fraction, trials);
    rep.isolated_se = binomial_se(rep.isolated_fraction, trials);
    return rep;
}

unsigned PolynomialOutput::degree() const {
    std::size_t d = 0;
    for (const auto& poly : coords)
        for (const auto& mono : poly) d = std::max(d, mono.entries.size());
    return static_cast<unsigned>(d);
}

namespace {

void validate_poly(const PolynomialOutput& p) {
    if (p.n == 0) throw PreconditionError("polynomial output needs n >= 1");
    if (p.coords.size() != p.n) throw DimensionError("one polynomial per coordinate required");
    const std::uint32_t cells = p.n * p.m;
    for (const auto& poly : p.coords)
        for (const auto& mono : poly)
            for (std::uint32_t e : mono.entries)
                if (e >= cells) throw DimensionError("monomial entry index out of range");
}

double eval_poly(const std::vector<Monomial>& poly, const RealVector& entries) {
    KahanSum acc;
    for (const auto& mono : poly) {
        double term = mono.coeff;
        for (std::uint32_t e : mono.entries) term *= entries[e];
        acc.add(term);
    }
    return acc.value();
}

double estimate_c(const PolynomialOutput& p, std::uint64_t seed) {
    const std::size_t samples = 10000;
    const std::uint32_t cells = p.n * p.m;
    KahanSum total;
    RealVector entries(cells);
    for (std::size_t s = 0; s < samples; ++s) {
        const std::uint64_t key = rng::derive_key(seed, s);
        for (std::uint32_t e = 0; e < cells; ++e) entries[e] = rng::normal_at(key, e);
        KahanSum sq;
        for (const auto& poly : p.coords) {
            const double v = eval_poly(poly, entries);
            sq.add(v * v);
        }
        total.add(sq.value());
    }
    // 1.2x headroom over the MC mean, recorded in the report
    return 1.2 * total.value() / static_cast<double>(samples) / static_cast<double>(p.n);
}

}  // namespace

PolySensitivityReport poly_noise_sensitivity(const PolynomialOutput& p, double eta,
                                             std::size_t trials, std::uint64_t seed,
                                             unsigned threads) {
    check_eta_open(eta);
    validate_poly(p);

    PolySensitivityReport rep;
    rep.eta = eta;
    rep.degree = p.degree();
    rep.trials = trials;
    rep.exact = trials == 0;
    if (p.has_c_bound) {
        rep.c_bound = p.c_bound;
        rep.c_estimated = false;
    } else {
        rep.c_bound = estimate_c(p, rng::derive_key(seed, 0xC0));
        rep.c_estimated = true;
    }
    rep.bound = 2.0 * rep.c_bound * rep.degree * eta * p.n;

    if (rep.exact) {
        if (rep.degree > 1) throw PreconditionError("exact mode covers degree <= 1 only");
        // constants cancel in the difference; aggregate linear coefficients per entry
        KahanSum sum_sq;
        for (const auto& poly : p.coords) {
            std::map<std::uint32_t, double> linear;
            for (const auto& mono : poly)
                if (mono.entries.size() == 1) linear[mono.entries[0]] += mono.coeff;
            for (const auto& [e, c] : linear) sum_sq.add(c * c);
        }
        rep.measured = 2.0 * (1.0 - std::sqrt(1.0 - eta)) * sum_sq.value();
        rep.se = 0.0;
        rep.measured_clipped = std::numeric_limits<double>::quiet_NaN();
        rep.clipped_le_unclipped = true;  // nonexpansiveness, not re-measured here
        rep.ok = rep.measured <= rep.bound + 1e-12;
        return rep;
    }

    const std::uint32_t cells = p.n * p.m;
    const double c_base = std::sqrt(1.0 - eta);
    const double c_fresh = std::sqrt(eta);
    const std::size_t n_chunks = chunk_count(0, trials, 64);
    std::vector<KahanSum> sums(n_chunks), sq_sums(n_chunks), clip_sums(n_chunks);
    std::vector<std::uint64_t> clip_violations(n_chunks, 0);

    for_chunks(0, trials, 64, static_cast<int>(threads),
               [&](std::size_t ci, std::uint64_t lo, std::uint64_t hi) {
                   RealVector g(cells), gt(cells), x(p.n), y(p.n);
                   for (std::uint64_t t = lo; t < hi; ++t) {
                       const std::uint64_t kg = rng::derive_key(seed, 2 * t);
                       const std::uint64_t kf = rng::derive_key(seed, 2 * t + 1);
                       for (std::uint32_t e = 0; e < cells; ++e) {
                           g[e] = rng::normal_at(kg, e);
                           gt[e] = c_base * g[e] + c_fresh * rng::normal_at(kf, e);
                       }
                       KahanSum diff, cdiff;
                       for (std::uint32_t i = 0; i < p.n; ++i) {
                           x[i] = eval_poly(p.coords[i], g);
                           y[i] = eval_poly(p.coords[i], gt);
                           const double d = x[i] - y[i];
                           diff.add(d * d);
                           const double dc = std::min(1.0, std::max(-1.0, x[i])) -
                                             std::min(1.0, std::max(-1.0, y[i]));
                           cdiff.add(dc * dc);
                       }
                       const double v = diff.value();
                       const double cv = cdiff.value();
                       if (cv > v + 1e-12) ++clip_violations[ci];
                       sums[ci].add(v);
                       sq_sums[ci].add(v * v);
                       clip_sums[ci].add(cv);
                   }
               });

    KahanSum total, total_sq, total_clip;
    std::uint64_t violations = 0;
    for (std::size_t ci = 0; ci < n_chunks; ++ci) {
        total.add(sums[ci].value());
        total_sq.add(sq_sums[ci].value());
        total_clip.add(clip_sums[ci].value());
        violations += clip_violations[ci];
    }
    const double nt = static_cast<double>(trials);
    rep.measured = total.value() / nt;
    const double var = std::max(0.0, (total_sq.value() / nt - rep.measured * rep.measured) * nt / (nt - 1.0));
    rep.se = std::sqrt(var / nt);
    rep.measured_clipped = total_clip.value() / nt;
    rep.clipped_le_unclipped = violations == 0;
    rep.ok = rep.measured <= rep.bound + 3.0 * rep.se;
    return rep;
}

}  // namespace pgl
