#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "pgl/enumerate.hpp"
#include "pgl/harness.hpp"
#include "pgl/model.hpp"
#include "pgl/stats.hpp"

using namespace pgl;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void spit(const std::string& path, const std::string& bytes) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    REQUIRE(f.good());
}

// reruns must agree everywhere except the one [meta] timestamp line
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

std::string tmp_path(const char* name) { return std::string("t_harness_") + name; }

}  // namespace

TEST_CASE("config entries parse by key with diagnostics") {
    ExperimentConfig cfg;
    apply_config_entry(cfg, "kind", "pipeline");
    apply_config_entry(cfg, "n", "16");
    apply_config_entry(cfg, "m", "4");
    apply_config_entry(cfg, "eta", "0.25");
    apply_config_entry(cfg, "seed", "18446744073709551615");
    apply_config_entry(cfg, "intervals", "-1 1 2.5 3");
    apply_config_entry(cfg, "exploratory", "yes");
    CHECK(cfg.kind == "pipeline");
    CHECK(cfg.n == 16);
    CHECK(*cfg.m == 4);
    CHECK(*cfg.eta == 0.25);
    CHECK(cfg.seed == 18446744073709551615ull);
    CHECK(cfg.intervals == std::vector<std::pair<double, double>>{{-1.0, 1.0}, {2.5, 3.0}});
    CHECK(cfg.exploratory);

    CHECK_THROWS_WITH_AS(apply_config_entry(cfg, "bogus", "1"), "unknown config key 'bogus'",
                         FormatError);
    CHECK_THROWS_AS(apply_config_entry(cfg, "n", "ten"), FormatError);
    CHECK_THROWS_AS(apply_config_entry(cfg, "seed", "-3"), FormatError);
    CHECK_THROWS_AS(apply_config_entry(cfg, "intervals", "1 2 3"), FormatError);
    CHECK_THROWS_AS(apply_config_entry(cfg, "exploratory", "maybe"), FormatError);
}

TEST_CASE("config files are key = value lines with comments") {
    const std::string path = tmp_path("cfg");
    spit(path,
         "# pipeline smoke\n"
         "kind = pipeline\n"
         "n = 12   # comment after value\n"
         "alpha = 0.25\n"
         "\n"
         "kappa = 0.5\n"
         "samples = 250\n");
    ExperimentConfig base;
    base.seed = 99;  // untouched by the file
    const ExperimentConfig cfg = parse_config_file(path, base);
    CHECK(cfg.kind == "pipeline");
    CHECK(cfg.n == 12);
    CHECK(*cfg.alpha == 0.25);
    CHECK(cfg.resolved_m() == 3);
    CHECK(*cfg.kappa == 0.5);
    CHECK(cfg.samples == 250);
    CHECK(cfg.seed == 99);

    spit(path, "kind pipeline\n");
    CHECK_THROWS_AS(parse_config_file(path), FormatError);
    spit(path, "= value\n");
    CHECK_THROWS_AS(parse_config_file(path), FormatError);
    CHECK_THROWS_AS(parse_config_file("no_such_file.cfg"), IoError);
    std::remove(path.c_str());
}

TEST_CASE("config resolution fills documented defaults") {
    ExperimentConfig cfg;
    cfg.kind = "enumerate";
    cfg.n = 20;
    cfg.m = 4;
    CHECK(cfg.resolved_m() == 4);
    CHECK(cfg.resolved_k() == 2);  // max(1, n/10)
    CHECK(cfg.resolved_eta() == doctest::Approx(3.0 * std::log(20.0) / 20.0));
    CHECK(std::holds_alternative<HalfSpace>(cfg.resolved_spec()));

    cfg.n = 5;
    CHECK(cfg.resolved_k() == 1);
    cfg.k = 3;
    CHECK(cfg.resolved_k() == 3);

    cfg.m.reset();
    cfg.alpha = 0.5;
    CHECK(cfg.resolved_m() == 3);  // round(0.5 * 5)

    cfg.kappa = 1.0;
    cfg.intervals = {{-1.0, 1.0}};
    CHECK_THROWS_AS(cfg.resolved_spec(), PreconditionError);
    cfg.kappa.reset();
    CHECK(std::holds_alternative<IntervalUnion>(cfg.resolved_spec()));
}

TEST_CASE("config validation rejects contradictions") {
    ExperimentConfig cfg;
    cfg.kind = "mystery";
    CHECK_THROWS_AS(cfg.validate(), PreconditionError);

    cfg.kind = "enumerate";
    cfg.n = 8;
    CHECK_THROWS_AS(cfg.validate(), PreconditionError);  // neither m nor alpha
    cfg.m = 2;
    cfg.alpha = 0.5;
    CHECK_THROWS_AS(cfg.validate(), PreconditionError);  // both
    cfg.alpha.reset();
    CHECK_NOTHROW(cfg.validate());

    cfg.threads = 0;
    CHECK_THROWS_AS(cfg.validate(), PreconditionError);
    cfg.threads = 1;

    cfg.kind = "gen";
    CHECK_THROWS_AS(cfg.validate(), PreconditionError);  // no out_instance
    cfg.out_instance = "x.pgl";
    CHECK_NOTHROW(cfg.validate());

    cfg = ExperimentConfig{};
    cfg.kind = "partition-test";
    cfg.cases = 0;
    CHECK_THROWS_AS(cfg.validate(), PreconditionError);
}

TEST_CASE("instance files round-trip bit-exactly") {
    const std::string path = tmp_path("roundtrip.pgl");
    {
        const auto inst = sample_disorder(7, 3, 123u, HalfSpace{-0.25});
        save_instance(inst, path);
        const auto back = load_instance(path);
        CHECK(back.n == inst.n);
        CHECK(back.m == inst.m);
        CHECK(back.seed == inst.seed);
        CHECK(back.g == inst.g);  // bitwise: doubles serialized verbatim
        CHECK(std::get<HalfSpace>(back.spec).kappa == -0.25);
        CHECK(instance_digest(back) == instance_digest(inst));
    }
    {
        const auto inst =
            sample_disorder(5, 2, 9u, IntervalUnion{{{-2.0, -1.0}, {0.5, 1.25}}});
        save_instance(inst, path);
        const auto back = load_instance(path);
        CHECK(back.g == inst.g);
        CHECK(std::get<IntervalUnion>(back.spec).intervals ==
              std::get<IntervalUnion>(inst.spec).intervals);
    }
    // saving twice produces identical bytes
    {
        const auto inst = sample_disorder(4, 2, 7u, HalfSpace{0.0});
        save_instance(inst, path);
        const auto d1 = file_digest(path);
        save_instance(inst, path);
        CHECK(file_digest(path) == d1);
    }
    std::remove(path.c_str());
}

TEST_CASE("reference instance file digest is pinned") {
    // fixed layout byte stream for (n=2, m=1, seed=42, kappa=0): any change
    // to the generator or the container format shows up here
    const std::string path = tmp_path("golden.pgl");
    const auto inst = sample_disorder(2, 1, 42u, HalfSpace{0.0});
    save_instance(inst, path);
    CHECK(file_digest(path) == 0x51339e62ed528838ull);
    CHECK(slurp(path).size() == 49);
    std::remove(path.c_str());
}

TEST_CASE("instance loader rejects malformed files") {
    const std::string path = tmp_path("bad.pgl");
    const auto inst = sample_disorder(3, 2, 5u, HalfSpace{0.5});
    save_instance(inst, path);
    std::string good = slurp(path);

    std::string bad = good;
    bad[0] = 'X';
    spit(path, bad);
    CHECK_THROWS_AS(load_instance(path), FormatError);  // magic

    bad = good;
    bad[4] = 2;
    spit(path, bad);
    CHECK_THROWS_AS(load_instance(path), FormatError);  // version

    spit(path, good.substr(0, good.size() - 3));
    CHECK_THROWS_AS(load_instance(path), FormatError);  // truncated

    spit(path, good + "zz");
    CHECK_THROWS_AS(load_instance(path), FormatError);  // trailing bytes

    CHECK_THROWS_AS(load_instance("no_such_file.pgl"), IoError);
    CHECK_THROWS_AS(save_instance(inst, "no/such/dir/x.pgl"), IoError);
    std::remove(path.c_str());
}

TEST_CASE("reports carry named sections with one timestamp line") {
    ExperimentConfig cfg;
    cfg.kind = "partition-test";
    cfg.cases = 5;
    cfg.seed = 3;
    const Report rep = run_experiment(cfg);
    const std::string text = report_to_string(rep);

    CHECK(text.find("[meta]\n") != std::string::npos);
    CHECK(text.find("[config]\n") != std::string::npos);
    CHECK(text.find("[results]\n") != std::string::npos);
    CHECK(text.find("[verdicts]\n") != std::string::npos);
    CHECK(text.find("kind = partition-test\n") != std::string::npos);
    CHECK(text.find("theorem_violation = no\n") != std::string::npos);
    // exactly one timestamp line, in [meta]
    const auto first = text.find("timestamp = ");
    REQUIRE(first != std::string::npos);
    CHECK(text.find("timestamp = ", first + 1) == std::string::npos);
    CHECK(first < text.find("[config]"));

    // identical rerun: only the timestamp may differ
    const Report rep2 = run_experiment(cfg);
    CHECK(drop_timestamp(report_to_string(rep2)) == drop_timestamp(text));
}

TEST_CASE("csv serialization is header plus LF rows") {
    Report r;
    r.csv_header = {"a", "b"};
    CHECK(csv_to_string(r) == "a,b\n");  // empty result set: header only
    r.csv_rows.push_back({"1", "2.5"});
    r.csv_rows.push_back({"3", "-0.125"});
    CHECK(csv_to_string(r) == "a,b\n1,2.5\n3,-0.125\n");
    CHECK(csv_to_string(r).find('\r') == std::string::npos);
}

TEST_CASE("csv numbers survive a parse round-trip at 17 digits") {
    ExperimentConfig cfg;
    cfg.kind = "gen";
    cfg.n = 6;
    cfg.m = 3;
    cfg.seed = 11;
    cfg.out_instance = tmp_path("gen.pgl");
    const Report rep = run_experiment(cfg);
    const auto inst = load_instance(cfg.out_instance);
    REQUIRE(rep.csv_rows.size() == 3);
    for (int a = 0; a < 3; ++a) {
        KahanSum norm2;
        for (double e : inst.row(a)) norm2.add(e * e);
        // strtod of the emitted text must reproduce the double bit-exactly
        CHECK(std::strtod(rep.csv_rows[a][1].c_str(), nullptr) == std::sqrt(norm2.value()));
    }
    std::remove(cfg.out_instance.c_str());
}

TEST_CASE("gen experiment writes a reloadable deterministic artifact") {
    ExperimentConfig cfg;
    cfg.kind = "gen";
    cfg.n = 10;
    cfg.alpha = 0.3;
    cfg.kappa = 0.25;
    cfg.seed = 77;
    cfg.out_instance = tmp_path("gen2.pgl");
    const Report r1 = run_experiment(cfg);
    const auto d1 = file_digest(cfg.out_instance);
    const Report r2 = run_experiment(cfg);
    CHECK(file_digest(cfg.out_instance) == d1);  // byte-identical rerun
    CHECK(drop_timestamp(report_to_string(r1)) == drop_timestamp(report_to_string(r2)));

    const auto inst = load_instance(cfg.out_instance);
    CHECK(inst.n == 10);
    CHECK(inst.m == 3);  // round(0.3 * 10)
    CHECK(std::get<HalfSpace>(inst.spec).kappa == 0.25);
    CHECK(r1.csv_rows.size() == 3);
    CHECK_FALSE(r1.theorem_violation);
    std::remove(cfg.out_instance.c_str());
}

TEST_CASE("enumerate experiment matches the library directly") {
    ExperimentConfig cfg;
    cfg.kind = "enumerate";
    cfg.n = 10;
    cfg.m = 3;
    cfg.seed = 5;
    cfg.kappa = 0.0;
    const Report rep = run_experiment(cfg);

    const auto inst = sample_disorder(10, 3, 5u, HalfSpace{0.0});
    const SolutionSet sols = enumerate_solutions(inst);
    CHECK(rep.csv_rows.size() == sols.size());
    for (std::size_t i = 0; i < sols.size(); ++i) {
        CHECK(rep.csv_rows[i][1] == std::to_string(sols.members[i]));
        CHECK(std::strtod(rep.csv_rows[i][2].c_str(), nullptr) == sols.margins[i]);
    }
    bool found = false;
    for (const auto& [k, v] : rep.results)
        if (k == "solution_count") {
            CHECK(v == std::to_string(sols.size()));
            found = true;
        }
    CHECK(found);
    CHECK_FALSE(rep.theorem_violation);
}

TEST_CASE("enumerate experiment loads a saved instance") {
    const std::string path = tmp_path("loadme.pgl");
    const auto inst = sample_disorder(8, 2, 13u, IntervalUnion{{{-1.0, 1.0}}});
    save_instance(inst, path);

    ExperimentConfig cfg;
    cfg.kind = "enumerate";
    cfg.in_instance = path;  // no n/m needed when loading
    const Report rep = run_experiment(cfg);
    CHECK(rep.csv_rows.size() == enumerate_solutions(inst).size());
    std::remove(path.c_str());
}

TEST_CASE("loaded instances drive the eta and k defaults") {
    const std::string path = tmp_path("defaults.pgl");
    const auto inst = sample_disorder(12, 3, 29u, HalfSpace{0.0});
    save_instance(inst, path);

    ExperimentConfig cfg;
    cfg.kind = "fragility";
    cfg.in_instance = path;  // eta = 3 ln 12 / 12 and k = 1 come from the file's n
    const Report rep = run_experiment(cfg);
    bool eta_seen = false, k_seen = false;
    for (const auto& [key, v] : rep.config) {
        if (key == "eta") {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", 3.0 * std::log(12.0) / 12.0);
            CHECK(v == buf);
            eta_seen = true;
        }
        if (key == "k") {
            CHECK(v == "1");
            k_seen = true;
        }
    }
    CHECK(eta_seen);
    CHECK(k_seen);
    std::remove(path.c_str());
}

TEST_CASE("fragility experiment verdicts pass on honest instances") {
    ExperimentConfig cfg;
    cfg.kind = "fragility";
    cfg.n = 12;
    cfg.m = 3;
    cfg.seed = 17;
    cfg.k = 2;
    const Report rep = run_experiment(cfg);
    CHECK_FALSE(rep.theorem_violation);
    CHECK(rep.csv_rows.empty());  // exceedance table should stay header-only
    CHECK(rep.csv_header == std::vector<std::string>{"sigma", "tau", "probability"});
    for (const auto& [k, v] : rep.verdicts)
        if (k == "margin_bound" || k == "fragility_bound") CHECK(v == "pass");
}

TEST_CASE("pipeline experiment handles the unconstrained edge") {
    ExperimentConfig cfg;
    cfg.kind = "pipeline";
    cfg.n = 6;
    cfg.m = 0;
    cfg.eta = 0.3;
    cfg.k = 1;
    cfg.samples = 200;
    const Report rep = run_experiment(cfg);
    CHECK_FALSE(rep.theorem_violation);
    CHECK(rep.csv_rows.size() == 200);
    for (const auto& row : rep.csv_rows) CHECK(row[2] == "0");  // never a singleton
    bool skipped = false;
    for (const auto& [k, v] : rep.verdicts)
        if (k == "counting_bound") skipped = v == "skipped";
    CHECK(skipped);
}

TEST_CASE("pipeline experiment emits the counting verdict chain") {
    ExperimentConfig cfg;
    cfg.kind = "pipeline";
    cfg.n = 12;
    cfg.m = 3;
    cfg.seed = 21;
    cfg.omega = 3;
    cfg.eta = 0.35;
    cfg.k = 2;
    cfg.samples = 1500;
    cfg.exploratory = true;
    const Report rep = run_experiment(cfg);
    CHECK_FALSE(rep.theorem_violation);  // exploratory events are theorems here
    bool pitt_pass = false, ge2_pass = false, root_seen = false;
    for (const auto& [k, v] : rep.verdicts) {
        if (k == "positive_correlation") pitt_pass = v == "pass";
        if (k == "count_ge2") ge2_pass = v == "pass";
    }
    for (const auto& [k, v] : rep.results)
        if (k == "bound_root") root_seen = v.substr(0, 9) == "0.8423292";
    CHECK(pitt_pass);
    CHECK(ge2_pass);
    CHECK(root_seen);
}

TEST_CASE("stability experiment reports a nonincreasing survival curve") {
    ExperimentConfig cfg;
    cfg.kind = "stability";
    cfg.n = 10;
    cfg.m = 3;
    cfg.eta = 0.2;
    cfg.samples = 120;
    cfg.seed = 8;
    const Report rep = run_experiment(cfg);
    CHECK(rep.csv_rows.size() == 120);
    CHECK(rep.csv_header == std::vector<std::string>{"trial", "distance", "rho", "t"});
    double last = 2.0;
    for (const auto& row : rep.csv_rows) {
        if (row[3].empty()) continue;
        const double t = std::strtod(row[3].c_str(), nullptr);
        CHECK(t <= last);
        last = t;
    }
    for (const auto& [k, v] : rep.verdicts)
        if (k == "survival_nonincreasing") CHECK(v == "pass");
}

TEST_CASE("success experiment counts hits against enumerated truth") {
    ExperimentConfig cfg;
    cfg.kind = "success";
    cfg.n = 8;
    cfg.m = 2;
    cfg.k = 1;
    cfg.samples = 120;
    cfg.seed = 4;
    const Report rep = run_experiment(cfg);
    REQUIRE(rep.csv_rows.size() == 120);
    std::size_t hits = 0;
    for (const auto& row : rep.csv_rows) hits += row[3] == "1";
    double frac = -1.0;
    for (const auto& [k, v] : rep.results)
        if (k == "success_fraction") frac = std::strtod(v.c_str(), nullptr);
    CHECK(frac == doctest::Approx(static_cast<double>(hits) / 120.0).epsilon(1e-12));
}

TEST_CASE("partition-test experiment sees zero violations") {
    ExperimentConfig cfg;
    cfg.kind = "partition-test";
    cfg.cases = 300;
    cfg.seed = 1;
    const Report rep = run_experiment(cfg);
    CHECK_FALSE(rep.theorem_violation);
    CHECK(rep.csv_rows.size() == 600);  // both lemmas, cases each
    for (const auto& row : rep.csv_rows) CHECK(row[6] == "1");
    std::size_t thirds = 0, halves = 0;
    for (const auto& row : rep.csv_rows) {
        thirds += row[1] == "thirds";
        halves += row[1] == "halves";
    }
    CHECK(thirds == 300);
    CHECK(halves == 300);
}

TEST_CASE("pitt-test experiment clears the 3 SE floor") {
    ExperimentConfig cfg;
    cfg.kind = "pitt-test";
    cfg.cases = 8;
    cfg.samples = 20000;
    cfg.seed = 2;
    cfg.threads = 2;
    const Report rep = run_experiment(cfg);
    CHECK_FALSE(rep.theorem_violation);
    CHECK(rep.csv_rows.size() == 8);
    for (const auto& row : rep.csv_rows) CHECK(row[8] == "1");
}

TEST_CASE("experiments are thread-count invariant modulo the timestamp") {
    const char* kinds[] = {"enumerate", "pipeline", "pitt-test", "stability"};
    for (const char* kind : kinds) {
        ExperimentConfig cfg;
        cfg.kind = kind;
        cfg.n = 10;
        cfg.m = 3;
        cfg.seed = 19;
        cfg.eta = 0.3;
        cfg.k = 2;
        cfg.samples = 400;
        cfg.cases = 4;
        cfg.exploratory = true;

        cfg.threads = 1;
        const Report r1 = run_experiment(cfg);
        cfg.threads = 4;
        const Report r4 = run_experiment(cfg);
        CHECK(drop_timestamp(report_to_string(r1)) == drop_timestamp(report_to_string(r4)));
        CHECK(csv_to_string(r1) == csv_to_string(r4));
    }
}

TEST_CASE("run_experiment writes the artifacts the config names") {
    ExperimentConfig cfg;
    cfg.kind = "partition-test";
    cfg.cases = 10;
    cfg.seed = 6;
    cfg.out_report = tmp_path("rep.txt");
    cfg.out_csv = tmp_path("rep.csv");
    const Report rep = run_experiment(cfg);
    CHECK(slurp(cfg.out_report) == report_to_string(rep));
    CHECK(slurp(cfg.out_csv) == csv_to_string(rep));
    std::remove(cfg.out_report.c_str());
    std::remove(cfg.out_csv.c_str());

    cfg.out_report = "no/such/dir/rep.txt";
    CHECK_THROWS_AS(run_experiment(cfg), IoError);
}
