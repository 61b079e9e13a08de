#include <cstdio>
#include <exception>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pgl/errors.hpp"
#include "pgl/harness.hpp"

namespace {

// one flag set shared by every subcommand; option pointers let us tell
// "given on the command line" apart from "still at its default", so flags
// can override config-file values key by key
struct CliValues {
    std::string config;
    int n = 0;
    int m = 0;
    double alpha = 0.0;
    double kappa = 0.0;
    std::vector<double> intervals;
    double eta = 0.0;
    int k = 0;
    double iota = 0.0;
    std::uint64_t samples = 0;
    std::uint64_t cases = 0;
    std::uint64_t seed = 0;
    std::uint64_t omega = 0;
    std::string algorithm;
    double rho_budget = 0.0;
    bool exploratory = false;
    int threads = 0;
    std::string out_report, out_csv, out_instance, in_instance;
};

struct CliOptions {
    CLI::Option *config, *n, *m, *alpha, *kappa, *intervals, *eta, *k, *iota, *samples, *cases,
        *seed, *omega, *algorithm, *rho_budget, *exploratory, *threads, *out_report, *out_csv,
        *out_instance, *in_instance;
};

CliOptions attach_options(CLI::App* sub, CliValues& v) {
    CliOptions o{};
    o.config = sub->add_option("--config", v.config, "key = value config file; flags override");
    o.n = sub->add_option("--n", v.n, "number of spins");
    o.m = sub->add_option("--m", v.m, "number of constraints");
    o.alpha = sub->add_option("--alpha", v.alpha, "constraint density, m = round(alpha n)");
    o.kappa = sub->add_option("--kappa", v.kappa, "half-space threshold");
    o.intervals = sub->add_option("--intervals", v.intervals,
                                  "interval-union endpoints a1 b1 a2 b2 ...");
    o.eta = sub->add_option("--eta", v.eta, "resampling noise level");
    o.k = sub->add_option("--k", v.k, "isolation distance");
    o.iota = sub->add_option("--iota", v.iota, "macroscopic isolation scale");
    o.samples = sub->add_option("--samples", v.samples, "trials / resamplings");
    o.cases = sub->add_option("--cases", v.cases, "random setups for the *-test kinds");
    o.seed = sub->add_option("--seed", v.seed, "master seed");
    o.omega = sub->add_option("--omega", v.omega, "algorithm internal randomness");
    o.algorithm = sub->add_option("--algorithm", v.algorithm, "registered algorithm id");
    o.rho_budget = sub->add_option("--rho-budget", v.rho_budget, "candidate ball slack");
    o.exploratory = sub->add_flag("--exploratory", v.exploratory,
                                  "pipeline: even/odd split when hypotheses fail");
    o.threads = sub->add_option("--threads", v.threads, "worker threads");
    o.out_report = sub->add_option("--report", v.out_report, "report file path");
    o.out_csv = sub->add_option("--csv", v.out_csv, "CSV file path");
    o.out_instance = sub->add_option("--out", v.out_instance, "instance file to write");
    o.in_instance = sub->add_option("--in", v.in_instance, "instance file to load");
    return o;
}

pgl::ExperimentConfig build_config(const std::string& kind, const CliValues& v,
                                   const CliOptions& o) {
    pgl::ExperimentConfig cfg;
    cfg.kind = kind;
    if (o.config->count()) cfg = pgl::parse_config_file(v.config, cfg);
    cfg.kind = kind;  // the subcommand always names the experiment

    if (o.n->count()) cfg.n = v.n;
    if (o.m->count()) cfg.m = v.m;
    if (o.alpha->count()) cfg.alpha = v.alpha;
    // m and alpha (likewise kappa and intervals) are one knob: a flag for
    // one of them supersedes a file value for the other
    if (o.m->count() && !o.alpha->count()) cfg.alpha.reset();
    if (o.alpha->count() && !o.m->count()) cfg.m.reset();
    if (o.kappa->count()) cfg.kappa = v.kappa;
    if (o.intervals->count()) {
        if (v.intervals.empty() || v.intervals.size() % 2 != 0)
            throw pgl::FormatError("--intervals needs an even list of endpoints");
        cfg.intervals.clear();
        for (std::size_t i = 0; i < v.intervals.size(); i += 2)
            cfg.intervals.emplace_back(v.intervals[i], v.intervals[i + 1]);
    }
    if (o.kappa->count() && !o.intervals->count()) cfg.intervals.clear();
    if (o.intervals->count() && !o.kappa->count()) cfg.kappa.reset();
    if (o.eta->count()) cfg.eta = v.eta;
    if (o.k->count()) cfg.k = v.k;
    if (o.iota->count()) cfg.iota = v.iota;
    if (o.samples->count()) cfg.samples = v.samples;
    if (o.cases->count()) cfg.cases = v.cases;
    if (o.seed->count()) cfg.seed = v.seed;
    if (o.omega->count()) cfg.omega = v.omega;
    if (o.algorithm->count()) cfg.algorithm = v.algorithm;
    if (o.rho_budget->count()) cfg.rho_budget = v.rho_budget;
    if (o.exploratory->count()) cfg.exploratory = v.exploratory;
    if (o.threads->count()) cfg.threads = v.threads;
    if (o.out_report->count()) cfg.out_report = v.out_report;
    if (o.out_csv->count()) cfg.out_csv = v.out_csv;
    if (o.out_instance->count()) cfg.out_instance = v.out_instance;
    if (o.in_instance->count()) cfg.in_instance = v.in_instance;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"desk-scale laboratory for the binary perceptron and its hardness machinery"};
    app.require_subcommand(1);

    const char* kinds[] = {"gen",       "enumerate", "fragility",      "pipeline",
                           "stability", "success",   "partition-test", "pitt-test"};
    const char* blurbs[] = {
        "sample a disorder instance and write it to a file",
        "exhaustively list solutions with margins and isolation",
        "check the margin bound and resampling fragility of isolated solutions",
        "run the full hardness pipeline around one algorithm output",
        "measure output stability under disorder resampling",
        "measure how often an algorithm locates (isolated) solutions",
        "stress the two split lemmas on random admissible weights",
        "stress the positive-correlation inequality on random Gaussian events"};

    CliValues values;
    std::map<std::string, CliOptions> options;
    for (std::size_t i = 0; i < 8; ++i)
        options[kinds[i]] = attach_options(app.add_subcommand(kinds[i], blurbs[i]), values);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;  // help prints cleanly; anything else is usage
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        const pgl::ExperimentConfig cfg =
            build_config(sub->get_name(), values, options.at(sub->get_name()));
        const pgl::Report rep = pgl::run_experiment(cfg);
        std::fputs(pgl::report_to_string(rep).c_str(), stdout);
        return rep.theorem_violation ? 2 : 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
