// Acceptance suite: one line per criterion, nonzero exit when any fails.
// Every tolerance is pinned here, next to the check that uses it.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "pgl/algorithms.hpp"
#include "pgl/coupling.hpp"
#include "pgl/enumerate.hpp"
#include "pgl/harness.hpp"
#include "pgl/model.hpp"
#include "pgl/partition.hpp"
#include "pgl/rng.hpp"
#include "pgl/stats.hpp"

using namespace pgl;

namespace {

int failures = 0;

template <typename Fn>
void criterion(int id, const char* label, Fn&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = false;
    try {
        ok = fn();
    } catch (const std::exception& e) {
        std::printf("       exception: %s\n", e.what());
        ok = false;
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] %2d %s (%.1fs)\n", ok ? "PASS" : "FAIL", id, label, secs);
    std::fflush(stdout);
    if (!ok) ++failures;
}

// fixed salts so every statistical criterion runs on one pinned, audited seed
constexpr std::uint64_t kSalt2 = 0xACCE5502ull;
constexpr std::uint64_t kSalt3 = 0xACCE5503ull;
constexpr std::uint64_t kSalt6 = 0xACCE5506ull;
constexpr std::uint64_t kSalt7 = 0xACCE5507ull;
constexpr std::uint64_t kSalt8 = 0xACCE5508ull;
constexpr std::uint64_t kSalt9 = 0xACCE5509ull;
constexpr std::uint64_t kSalt10 = 0xACCE5510ull;
constexpr std::uint64_t kSalt12 = 0xACCE5512ull;

ConstraintSpec spec_cycle(std::uint64_t i) {
    switch (i % 4) {
        case 0: return HalfSpace{-0.5};
        case 1: return HalfSpace{0.0};
        case 2: return HalfSpace{0.5};
        default: return IntervalUnion{{{-1.0, 1.0}}};
    }
}

bool same_set(const SolutionSet& a, const SolutionSet& b) {
    return a.members == b.members && a.margins == b.margins;
}

std::string drop_timestamp(const std::string& report) {
    std::string out;
    std::size_t at = 0;
    while (at < report.size()) {
        auto end = report.find('\n', at);
        if (end == std::string::npos) end = report.size();
        const std::string line = report.substr(at, end - at);
        if (line.rfind("timestamp = ", 0) != 0) out += line + "\n";
        at = end + 1;
    }
    return out;
}

}  // namespace

int main() {
    criterion(1, "root constant solves 2s^2/9 + s = 1 within 1e-12 inside [0.84232, 0.84233]",
              [] {
                  const double s = bound_root();
                  return std::fabs(2.0 * s * s / 9.0 + s - 1.0) <= 1e-12 && s >= 0.84232 &&
                         s <= 0.84233;
              });

    criterion(2, "Gray-walk enumerator equals the naive full scan on 50 random instances", [] {
        RngStream rs(kSalt2);
        for (std::uint64_t i = 0; i < 50; ++i) {
            const int n = 10 + static_cast<int>(rs.next_below(5));
            const int m = 2 + static_cast<int>(rs.next_below(4));
            const auto inst = sample_disorder(n, m, rng::derive_key(kSalt2, 100 + i),
                                              spec_cycle(i));
            if (!same_set(enumerate_solutions(inst, 4), oracle::enumerate_naive(inst)))
                return false;
        }
        return true;
    });

    criterion(3, "every 1-isolated solution obeys margin <= 2 |G|_inf / sqrt(N), 100 instances",
              [] {
                  std::size_t checked = 0;
                  for (std::uint64_t i = 0; i < 100; ++i) {
                      const auto inst =
                          sample_disorder(14, 4, rng::derive_key(kSalt3, i), HalfSpace{0.0});
                      const SolutionSet sols = enumerate_solutions(inst, 4);
                      const MarginBoundReport mb = verify_margin_bound(inst, sols);
                      if (!mb.ok()) return false;
                      checked += mb.isolated_checked;
                  }
                  return checked > 0;  // the bound must have been exercised
              });

    criterion(4, "exact retention of 2-isolated solutions stays below 1/2 + eps, <= 5% excluded",
              [] {
                  const double eta = 3.0 * std::log(14.0) / 14.0;
                  std::size_t excluded = 0;
                  for (std::uint64_t i = 0; i < 100; ++i) {
                      const auto inst =
                          sample_disorder(14, 4, rng::derive_key(kSalt3, i), HalfSpace{0.0});
                      const SolutionSet sols = enumerate_solutions(inst, 4);
                      const FragilityReport fr = fragility_report(inst, sols, 2, eta);
                      if (!fr.norm_event_ok) {
                          ++excluded;
                          continue;
                      }
                      if (!fr.ok()) return false;
                  }
                  return excluded <= 5;
              });

    criterion(5, "thirds and halves splits: zero violations on 10^4 random cases each", [] {
        RngStream thirds_rs(0xACCE5505ull);
        for (int c = 0; c < 10000; ++c) {
            const WeightVector w = random_thirds_weights(thirds_rs);
            const PartitionResult res = partition_thirds(w);
            const double third = w.total / 3.0;
            if (!(res.sum1 >= third && res.sum2 >= third &&
                  res.sum1 * res.sum2 >= 2.0 * w.total * w.total / 9.0))
                return false;
        }
        RngStream halves_rs(0xACCE5515ull);
        for (int c = 0; c < 10000; ++c) {
            const WeightVector w = random_halves_weights(halves_rs);
            const PartitionResult res = partition_halves(w);
            if (!(res.sum1 >= 0.49 * w.total && res.sum2 >= 0.49 * w.total)) return false;
        }
        return true;
    });

    criterion(6, "monotone-event correlation gap >= -3 SE on 50 setups, none below -5 SE", [] {
        bool ok = true;
        for (std::uint64_t c = 0; c < 50; ++c) {
            const PittSetup setup = random_pitt_setup(rng::derive_key(kSalt6, 2 * c));
            const PittReport rep =
                pitt_check(setup.cov, setup.mean, setup.event_a, setup.event_b, 100000,
                           rng::derive_key(kSalt6, 2 * c + 1), 4);
            if (!rep.ok5()) {
                std::printf("       case %llu: gap %.3g vs -5se %.3g (hard)\n",
                            static_cast<unsigned long long>(c), rep.gap, -5.0 * rep.se);
                return false;
            }
            if (!rep.ok3()) {
                std::printf("       case %llu: gap %.3g vs -3se %.3g\n",
                            static_cast<unsigned long long>(c), rep.gap, -3.0 * rep.se);
                ok = false;
            }
        }
        return ok;
    });

    criterion(7, "closed-form retention matches Monte Carlo within 3 SE on 50 random triples",
              [] {
                  RngStream rs(kSalt7);
                  for (std::uint64_t i = 0; i < 50; ++i) {
                      const int n = 8 + static_cast<int>(rs.next_below(5));
                      const int m = 1 + static_cast<int>(rs.next_below(4));
                      const auto inst =
                          sample_disorder(n, m, rng::derive_key(kSalt7, 100 + i), spec_cycle(i));
                      const SpinConfig tau(
                          static_cast<std::uint32_t>(rs.next_below(1ull << n)), n);
                      const double eta = 0.1 + 0.8 * rs.next_uniform();
                      const double exact = conditional_feasibility(inst, tau, eta);
                      const double mc = oracle::conditional_feasibility_mc(
                          inst, tau, eta, 100000, rng::derive_key(kSalt7, 200 + i));
                      const double se = binomial_se(exact, 100000);
                      if (std::fabs(exact - mc) > 3.0 * std::max(se, 1e-7)) {
                          std::printf("       triple %llu: exact %.6f mc %.6f se %.2g\n",
                                      static_cast<unsigned long long>(i), exact, mc, se);
                          return false;
                      }
                  }
                  return true;
              });

    criterion(8, "resampled-field covariance matches eta q 1{a=a'} within 4 SE on 20 pairs", [] {
        const auto inst = sample_disorder(10, 3, 88u, HalfSpace{0.0});
        RngStream rs(kSalt8);
        for (std::uint64_t i = 0; i < 20; ++i) {
            const SpinConfig tau(static_cast<std::uint32_t>(rs.next_below(1u << 10)), 10);
            SpinConfig tau2(static_cast<std::uint32_t>(rs.next_below(1u << 10)), 10);
            if (i == 0) tau2 = tau;                                  // q = 1
            if (i == 1) tau2 = SpinConfig(~tau.bits() & 0x3FFu, 10); // q = -1
            const auto rep = overlap_covariance_check(inst, tau, tau2, 0.4, 100000,
                                                      rng::derive_key(kSalt8, i), 4);
            if (!rep.ok) {
                std::printf("       pair %llu: max dev %.2f SE\n",
                            static_cast<unsigned long long>(i), rep.max_dev_in_se);
                return false;
            }
        }
        return true;
    });

    criterion(9, "low-degree noise sensitivity: exact degree-1 form and 30 random D<=4 outputs",
              [] {
                  // degree 1 exact: measured = 2(1 - sqrt(1-eta)) <= 2 eta
                  PolynomialOutput base;
                  base.n = 2;
                  base.m = 1;
                  base.coords = {{Monomial{{0u}, 1.0}}, {}};
                  base.has_c_bound = true;
                  base.c_bound = 0.5;
                  for (double eta : {0.01, 0.1, 0.5}) {
                      const auto rep = poly_noise_sensitivity(base, eta, 0, 1);
                      if (!rep.exact || !rep.ok) return false;
                      if (std::fabs(rep.measured - 2.0 * (1.0 - std::sqrt(1.0 - eta))) > 1e-12)
                          return false;
                      if (rep.measured > 2.0 * eta) return false;
                  }

                  RngStream rs(kSalt9);
                  for (int t = 0; t < 30; ++t) {
                      const int n = 2 + static_cast<int>(rs.next_below(7));
                      const int m = 1 + static_cast<int>(rs.next_below(8));  // n*m <= 64
                      PolynomialOutput p;
                      p.n = static_cast<std::uint32_t>(n);
                      p.m = static_cast<std::uint32_t>(m);
                      p.coords.resize(static_cast<std::size_t>(n));
                      for (auto& poly : p.coords) {
                          const int monos = static_cast<int>(rs.next_below(3));
                          for (int j = 0; j < monos; ++j) {
                              Monomial mo;
                              const int deg = 1 + static_cast<int>(rs.next_below(4));
                              for (int d = 0; d < deg; ++d)
                                  mo.entries.push_back(static_cast<std::uint32_t>(
                                      rs.next_below(static_cast<std::uint64_t>(n) * m)));
                              mo.coeff = rs.next_uniform() - 0.5;
                              poly.push_back(std::move(mo));
                          }
                      }
                      const double eta = 0.05 + 0.45 * rs.next_uniform();
                      const auto rep = poly_noise_sensitivity(
                          p, eta, 4000, rng::derive_key(kSalt9, 500 + t), 4);
                      if (!rep.ok || !rep.clipped_le_unclipped) {
                          std::printf("       output %d: measured %.4g bound %.4g se %.2g\n", t,
                                      rep.measured, rep.bound, rep.se);
                          return false;
                      }
                  }
                  return true;
              });

    criterion(10, "coupled majority-feasibility beats the squared estimate minus 4 SE", [] {
        const InstanceEvent event = [](const DisorderInstance& g) {
            const RealVector out = run_majority(g);
            std::vector<int> spins(out.size());
            for (std::size_t i = 0; i < out.size(); ++i) spins[i] = out[i] >= 0.0 ? 1 : -1;
            return is_solution(g, SpinConfig::from_spins(spins));
        };
        const double eta = 3.0 * std::log(16.0) / 16.0;
        const JensenReport rep =
            jensen_check(16, 4, HalfSpace{0.0}, eta, event, 10000, kSalt10, 4);
        if (!rep.ok)
            std::printf("       joint %.4f square %.4f combined se %.4f\n", rep.p_joint,
                        rep.p_single * rep.p_single, rep.se_combined);
        return rep.ok;
    });

    criterion(11, "hardness pipeline bookkeeping: singleton mass exact, overlaps nonnegative,"
                  " conditional event chain", [] {
        const auto inst = sample_disorder(16, 4, 0xACCE5511ull, HalfSpace{0.0});
        const auto run = [&inst](bool exploratory) {
            return hardness_pipeline(inst, "majority", 0xE11ull, 3.0 * std::log(16.0) / 16.0, 4,
                                     2.0, 10000, 4, exploratory);
        };
        const PipelineReport r = run(false);

        // integer-exact singleton accounting
        std::uint64_t total = 0;
        for (std::uint64_t c : r.singleton_counts) total += c;
        if (total != r.singleton_trials) return false;
        KahanSum ptau;
        for (double p : r.p_tau) ptau.add(p);
        if (std::fabs(ptau.value() - r.s_hat) > 1e-12) return false;
        if (r.zero_trials + r.singleton_trials + r.ge2_trials != 10000) return false;

        if (!r.q_nonneg || r.q_min < 0.0) return false;

        // the two-group event bound applies whenever the split hypotheses fire
        if (r.hypotheses_met && r.event_machinery_ok && !(r.pitt_ok && r.ge2_ok)) return false;

        // exercise the event machinery itself through the fallback split
        const PipelineReport x = run(true);
        if (!x.partition_ran || !x.event_machinery_ok) return false;
        if (!(x.pitt_ok && x.ge2_ok)) {
            std::printf("       exploratory: gap %.4g vs -3se %.4g, ge2 %.4g vs joint %.4g\n",
                        x.pitt_gap, -3.0 * x.pitt_se, x.phase4_ge2_hat, x.joint_hat);
            return false;
        }
        // plainly feasible disjoint groups: joint success forces count >= 2
        return x.both_count == x.joint_count && x.phase4_ge2_count >= x.joint_count;
    });

    criterion(12, "near-endpoint side is unique over Hamming-1 balls on 20 two-sided instances",
              [] {
                  const double threshold = 5.0 / std::log(20.0);
                  for (std::uint64_t i = 0; i < 20; ++i) {
                      const auto inst =
                          sample_disorder(20, 5, rng::derive_key(kSalt12, i),
                                          IntervalUnion{{{-3.25, 3.25}}});
                      if (norm_inf(inst) > 10.0 * std::sqrt(std::log(20.0))) continue;
                      const SolutionSet sols = enumerate_solutions(inst, 4);
                      if (sols.size() == 0) continue;
                      const SpinConfig sigma = sols.config(0);
                      std::vector<SpinConfig> ball{sigma};
                      for (int b = 0; b < 20; ++b) ball.push_back(sigma.flipped(b));
                      const auto rep = active_side_analysis(inst, sigma, ball, threshold);
                      if (!rep.unique_side) {
                          std::printf("       instance %llu: ambiguous side\n",
                                      static_cast<unsigned long long>(i));
                          return false;
                      }
                  }
                  return true;
              });

    criterion(13, "all eight experiment kinds are byte-identical across thread counts", [] {
        std::vector<ExperimentConfig> cfgs(8);
        cfgs[0].kind = "gen";
        cfgs[0].n = 10;
        cfgs[0].m = 3;
        cfgs[0].out_instance = "t_accept_gen.pgl";
        cfgs[1].kind = "enumerate";
        cfgs[1].n = 12;
        cfgs[1].m = 3;
        cfgs[2].kind = "fragility";
        cfgs[2].n = 10;
        cfgs[2].m = 3;
        cfgs[2].k = 2;
        cfgs[3].kind = "pipeline";
        cfgs[3].n = 12;
        cfgs[3].m = 3;
        cfgs[3].k = 2;
        cfgs[3].eta = 0.35;
        cfgs[3].samples = 500;
        cfgs[3].exploratory = true;
        cfgs[4].kind = "stability";
        cfgs[4].n = 10;
        cfgs[4].m = 3;
        cfgs[4].eta = 0.3;
        cfgs[4].samples = 120;
        cfgs[5].kind = "success";
        cfgs[5].n = 8;
        cfgs[5].m = 2;
        cfgs[5].k = 1;
        cfgs[5].samples = 120;
        cfgs[6].kind = "partition-test";
        cfgs[6].cases = 500;
        cfgs[7].kind = "pitt-test";
        cfgs[7].cases = 4;
        cfgs[7].samples = 20000;
        for (auto& cfg : cfgs) {
            cfg.seed = 19;
            cfg.threads = 1;
            const Report r1 = run_experiment(cfg);
            cfg.threads = 4;
            const Report r4 = run_experiment(cfg);
            if (drop_timestamp(report_to_string(r1)) != drop_timestamp(report_to_string(r4)) ||
                csv_to_string(r1) != csv_to_string(r4)) {
                std::printf("       kind %s differs across thread counts\n", cfg.kind.c_str());
                return false;
            }
        }
        std::remove("t_accept_gen.pgl");
        return true;
    });

    std::printf("%d of 13 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
