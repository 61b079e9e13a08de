#include "pgl/coupling.hpp"

#include <algorithm>
#include <cmath>

#include "pgl/normal.hpp"
#include "pgl/parallel.hpp"
#include "pgl/rng.hpp"
#include "pgl/stats.hpp"

namespace pgl {

namespace {

void check_eta(double eta) {
    if (!(eta > 0.0) || !(eta <= 1.0)) throw PreconditionError("coupling: eta must be in (0, 1]");
}

}  // namespace

double CoupledInstance::shared_lambda() const {
    return 1.0 - std::sqrt(1.0 - eta);
}

CoupledInstance make_coupled(const DisorderInstance& base, double eta, std::uint64_t fresh_seed) {
    check_eta(eta);
    CoupledInstance c;
    c.base = base;
    c.fresh = sample_disorder(base.n, base.m, fresh_seed, base.spec);
    c.eta = eta;
    return c;
}

DisorderInstance realize_tilde(const CoupledInstance& c) {
    check_eta(c.eta);
    if (c.fresh.n != c.base.n || c.fresh.m != c.base.m)
        throw DimensionError("realize_tilde: base and fresh shapes differ");
    const double w_base = std::sqrt(1.0 - c.eta);
    const double w_fresh = std::sqrt(c.eta);
    DisorderInstance out = c.base;
    out.seed = c.fresh.seed;  // not regenerable from a single seed; keep the fresh one for the record
    for (std::size_t i = 0; i < out.g.size(); ++i) out.g[i] = w_base * c.base.g[i] + w_fresh * c.fresh.g[i];
    return out;
}

double constraint_mass(const ConstraintSpec& spec, double mu, double sd) {
    if (const auto* hs = std::get_if<HalfSpace>(&spec)) return normal_sf((hs->kappa - mu) / sd);
    double total = 0.0;
    for (const auto& [a, b] : std::get<IntervalUnion>(spec).intervals)
        total += normal_interval_mass(a, b, mu, sd);
    return total;
}

double conditional_feasibility(const DisorderInstance& inst, const SpinConfig& tau, double eta) {
    check_eta(eta);
    const RealVector f = fields(inst, tau);
    const double shrink = std::sqrt(1.0 - eta);
    const double sd = std::sqrt(eta);
    double p = 1.0;
    for (double v : f) p *= constraint_mass(inst.spec, shrink * v, sd);
    return p;
}

MarginBoundReport verify_margin_bound(const DisorderInstance& inst, const SolutionSet& s) {
    if (s.n != inst.n) throw DimensionError("verify_margin_bound: set does not match instance");
    MarginBoundReport rep;
    rep.bound = 2.0 * norm_inf(inst) / std::sqrt(static_cast<double>(inst.n));
    const IsolationReport iso = classify_isolation(s, 1);
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!iso.isolated[i]) continue;
        ++rep.isolated_checked;
        // exact margin, not the enumerator's incremental one
        const double m = margin(inst, s.config(i));
        if (m > rep.bound + 1e-12) rep.violations.push_back(s.members[i]);
    }
    return rep;
}

namespace {

// largest value of constraint_mass over fields whose slack is <= margin_cap
// (the critical constraint of any ball member is such a field)
double sup_retention_interval(const IntervalUnion& u, double eta, double margin_cap) {
    const double shrink = std::sqrt(1.0 - eta);
    const double sd = std::sqrt(eta);
    const ConstraintSpec spec = u;

    const double lo_end = u.intervals.front().first;
    const double hi_end = u.intervals.back().second;
    // all local maxima of the mass live under the intervals (in mu-space);
    // pad by the cap and a little slack to cover the admissible boundary
    const double lo = std::min(lo_end, shrink > 0.0 ? lo_end / shrink : lo_end) - margin_cap - 1.0;
    const double hi = std::max(hi_end, shrink > 0.0 ? hi_end / shrink : hi_end) + margin_cap + 1.0;

    const auto value = [&](double field) { return constraint_mass(spec, shrink * field, sd); };
    const auto admissible = [&](double field) { return signed_slack(spec, field) <= margin_cap; };

    double best = 0.0;
    double best_f = lo;
    const int grid = 4000;
    const double step = (hi - lo) / grid;
    for (int i = 0; i <= grid; ++i) {
        const double f = lo + step * i;
        if (!admissible(f)) continue;
        const double v = value(f);
        if (v > best) {
            best = v;
            best_f = f;
        }
    }
    // exact boundary candidates of the admissible set
    for (const auto& [a, b] : u.intervals) {
        for (double f : {a, b, a + margin_cap, b - margin_cap}) {
            if (!admissible(f)) continue;
            const double v = value(f);
            if (v > best) {
                best = v;
                best_f = f;
            }
        }
    }
    // golden-section polish inside the surrounding grid cell
    double a = best_f - step, b = best_f + step;
    const double gr = 0.6180339887498949;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    for (int it = 0; it < 80; ++it) {
        const double v1 = admissible(x1) ? value(x1) : -1.0;
        const double v2 = admissible(x2) ? value(x2) : -1.0;
        if (v1 < v2) {
            a = x1;
            x1 = x2;
            x2 = a + gr * (b - a);
        } else {
            b = x2;
            x2 = x1;
            x1 = b - gr * (b - a);
        }
    }
    const double mid = 0.5 * (a + b);
    if (admissible(mid)) best = std::max(best, value(mid));
    return best;
}

}  // namespace

double fragility_epsilon(const ConstraintSpec& spec, double eta, double margin_cap) {
    check_eta(eta);
    if (!(margin_cap >= 0.0)) throw PreconditionError("fragility_epsilon: margin_cap must be >= 0");
    if (const auto* hs = std::get_if<HalfSpace>(&spec)) {
        const double t = (hs->kappa * (1.0 - std::sqrt(1.0 - eta)) - std::sqrt(1.0 - eta) * margin_cap) /
                         std::sqrt(eta);
        return normal_cdf(0.0) - normal_cdf(-std::fabs(t));
    }
    const double sup = sup_retention_interval(std::get<IntervalUnion>(spec), eta, margin_cap);
    return std::max(0.0, sup - 0.5);
}

FragilityReport fragility_report(const DisorderInstance& inst, const SolutionSet& s, int k, double eta) {
    check_eta(eta);
    if (s.n != inst.n) throw DimensionError("fragility_report: set does not match instance");
    if (k < 1 || k > inst.n) throw PreconditionError("fragility_report: k must be in [1, n]");

    FragilityReport rep;
    rep.k = k;
    rep.eta = eta;
    rep.margin_cap = 2.0 * norm_inf(inst) / std::sqrt(static_cast<double>(inst.n));
    rep.norm_event_ok = norm_inf(inst) <= 10.0 * std::sqrt(std::log(static_cast<double>(inst.n)));
    rep.epsilon = fragility_epsilon(inst.spec, eta, rep.margin_cap);

    const double threshold = 0.5 + rep.epsilon + kFragilitySlack;
    const IsolationReport iso = classify_isolation(s, k);
    rep.isolated_count = iso.count;
    const std::vector<std::uint32_t> masks = hamming_ball_masks(inst.n, k);

    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!iso.isolated[i]) continue;
        const std::uint32_t sigma = s.members[i];
        // the center first, then the punctured ball
        for (std::size_t w = 0; w <= masks.size(); ++w) {
            const std::uint32_t tau = w == 0 ? sigma : sigma ^ masks[w - 1];
            const double p = conditional_feasibility(inst, SpinConfig(tau, inst.n), eta);
            ++rep.pairs_checked;
            if (p > rep.max_probability) {
                rep.max_probability = p;
                rep.argmax_sigma = sigma;
                rep.argmax_tau = tau;
            }
            if (p > threshold) rep.exceedances.push_back({sigma, tau, p});
        }
    }
    return rep;
}

CovarianceCheckReport overlap_covariance_check(const DisorderInstance& inst, const SpinConfig& tau,
                                               const SpinConfig& tau2, double eta, std::size_t samples,
                                               std::uint64_t mc_seed, int threads) {
    check_eta(eta);
    if (tau.n() != inst.n || tau2.n() != inst.n)
        throw DimensionError("overlap_covariance_check: config dimension mismatch");
    if (inst.m < 1) throw PreconditionError("overlap_covariance_check: needs at least one constraint");
    if (samples < 2) throw PreconditionError("overlap_covariance_check: needs at least two samples");

    CovarianceCheckReport rep;
    rep.m = inst.m;
    rep.eta = eta;
    rep.q = overlap(tau, tau2);
    rep.samples = samples;

    const int dim = 2 * inst.m;
    const double shrink = std::sqrt(1.0 - eta);
    const double noise = std::sqrt(eta);
    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(inst.n));
    const RealVector f1 = fields(inst, tau);
    const RealVector f2 = fields(inst, tau2);

    // per-sample draws land in preallocated slots; order of filling is
    // irrelevant, so the estimate is thread-count independent
    std::vector<std::vector<double>> x(static_cast<std::size_t>(dim),
                                       std::vector<double>(samples, 0.0));
    for_chunks(0, samples, 4096, threads, [&](std::size_t, std::uint64_t lo, std::uint64_t hi) {
        for (std::uint64_t s = lo; s < hi; ++s) {
            const std::uint64_t key = rng::derive_key(mc_seed, s);
            for (int a = 0; a < inst.m; ++a) {
                double w1 = 0.0, w2 = 0.0;
                for (int i = 0; i < inst.n; ++i) {
                    const double gp = rng::normal_at(key, static_cast<std::uint64_t>(a) * inst.n + i);
                    w1 += gp * tau.spin(i);
                    w2 += gp * tau2.spin(i);
                }
                x[static_cast<std::size_t>(a)][s] = shrink * f1[a] + noise * w1 * inv_sqrt_n;
                x[static_cast<std::size_t>(inst.m + a)][s] = shrink * f2[a] + noise * w2 * inv_sqrt_n;
            }
        }
    });

    rep.empirical.assign(static_cast<std::size_t>(dim) * dim, 0.0);
    rep.predicted.assign(static_cast<std::size_t>(dim) * dim, 0.0);
    rep.se.assign(static_cast<std::size_t>(dim) * dim, 0.0);
    rep.ok = true;
    for (int r = 0; r < dim; ++r) {
        for (int c = 0; c < dim; ++c) {
            const int ar = r % inst.m, ac = c % inst.m;
            const bool same_tau = (r < inst.m) == (c < inst.m);
            double pred = 0.0;
            if (ar == ac) pred = eta * (same_tau ? 1.0 : rep.q);
            const CovEstimate est = covariance_with_se(x[static_cast<std::size_t>(r)],
                                                       x[static_cast<std::size_t>(c)]);
            const std::size_t idx = static_cast<std::size_t>(r) * dim + c;
            rep.empirical[idx] = est.cov;
            rep.predicted[idx] = pred;
            rep.se[idx] = est.se;
            const double dev = std::fabs(est.cov - pred);
            if (est.se > 0.0) {
                const double in_se = dev / est.se;
                if (in_se > rep.max_dev_in_se) rep.max_dev_in_se = in_se;
                if (dev > 4.0 * est.se) rep.ok = false;
            } else if (dev > 0.0) {
                rep.ok = false;
            }
        }
    }
    return rep;
}

JensenReport jensen_check(int n, int m, const ConstraintSpec& spec, double eta, const InstanceEvent& event,
                          std::size_t trials, std::uint64_t seed, int threads) {
    check_eta(eta);
    if (trials < 2) throw PreconditionError("jensen_check: needs at least two trials");

    JensenReport rep;
    rep.eta = eta;
    rep.lambda = 1.0 - std::sqrt(1.0 - eta);
    rep.trials = trials;

    const double w_shared = std::sqrt(1.0 - rep.lambda);
    const double w_own = std::sqrt(rep.lambda);

    std::vector<std::uint8_t> u(trials, 0), v(trials, 0);
    for_chunks(0, trials, 256, threads, [&](std::size_t, std::uint64_t lo, std::uint64_t hi) {
        for (std::uint64_t t = lo; t < hi; ++t) {
            const auto g1 = sample_disorder(n, m, rng::derive_key(seed, 3 * t), spec);
            const auto g2 = sample_disorder(n, m, rng::derive_key(seed, 3 * t + 1), spec);
            const auto g3 = sample_disorder(n, m, rng::derive_key(seed, 3 * t + 2), spec);
            DisorderInstance g = g1, gt = g1;
            for (std::size_t i = 0; i < g.g.size(); ++i) {
                g.g[i] = w_shared * g1.g[i] + w_own * g2.g[i];
                gt.g[i] = w_shared * g1.g[i] + w_own * g3.g[i];
            }
            u[t] = event(g) ? 1 : 0;
            v[t] = event(gt) ? 1 : 0;
        }
    });

    KahanSum su, sv, sj;
    for (std::size_t t = 0; t < trials; ++t) {
        su.add(u[t]);
        sv.add(v[t]);
        sj.add(u[t] && v[t] ? 1.0 : 0.0);
    }
    const double nt = static_cast<double>(trials);
    rep.p_single = su.value() / nt;
    rep.p_tilde = sv.value() / nt;
    rep.p_joint = sj.value() / nt;

    // SE of the statistic p_joint - p_single^2 via its influence function
    // h_t = j_t - 2 p_single u_t
    KahanSum sh, sh2;
    for (std::size_t t = 0; t < trials; ++t) {
        const double j = (u[t] && v[t]) ? 1.0 : 0.0;
        const double h = j - 2.0 * rep.p_single * u[t];
        sh.add(h);
        sh2.add(h * h);
    }
    const double hm = sh.value() / nt;
    const double hvar = sh2.value() / nt - hm * hm;
    rep.se_combined = hvar > 0.0 ? std::sqrt(hvar / nt) : 0.0;

    rep.ok = rep.p_joint >= rep.p_single * rep.p_single - 4.0 * rep.se_combined;
    return rep;
}

}  // namespace pgl
