#include "pgl/harness.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pgl/algorithms.hpp"
#include "pgl/coupling.hpp"
#include "pgl/enumerate.hpp"
#include "pgl/partition.hpp"
#include "pgl/rng.hpp"
#include "pgl/stats.hpp"

namespace pgl {

namespace {

constexpr const char* kKinds[] = {"gen",       "enumerate", "fragility",      "pipeline",
                                  "stability", "success",   "partition-test", "pitt-test"};

bool known_kind(const std::string& kind) {
    for (const char* k : kKinds)
        if (kind == k) return true;
    return false;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_hex(std::uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string yesno(bool b) { return b ? "yes" : "no"; }
std::string passfail(bool b) { return b ? "pass" : "fail"; }

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

long long parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(value, &used);
        if (used != value.size()) throw FormatError("");
        return v;
    } catch (const std::exception&) {
        throw FormatError("config key '" + key + "' needs an integer, got '" + value + "'");
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const std::uint64_t v = std::stoull(value, &used);
        if (used != value.size() || value.front() == '-') throw FormatError("");
        return v;
    } catch (const std::exception&) {
        throw FormatError("config key '" + key + "' needs an unsigned integer, got '" + value +
                          "'");
    }
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw FormatError("");
        return v;
    } catch (const std::exception&) {
        throw FormatError("config key '" + key + "' needs a number, got '" + value + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "1" || value == "true" || value == "yes") return true;
    if (value == "0" || value == "false" || value == "no") return false;
    throw FormatError("config key '" + key + "' needs a boolean, got '" + value + "'");
}

std::vector<std::pair<double, double>> parse_intervals(const std::string& key,
                                                       const std::string& value) {
    std::istringstream in(value);
    std::vector<double> nums;
    std::string tok;
    while (in >> tok) nums.push_back(parse_double(key, tok));
    if (nums.empty() || nums.size() % 2 != 0)
        throw FormatError("config key '" + key + "' needs an even list of endpoints");
    std::vector<std::pair<double, double>> out;
    for (std::size_t i = 0; i < nums.size(); i += 2) out.emplace_back(nums[i], nums[i + 1]);
    return out;
}

}  // namespace

int ExperimentConfig::resolved_m() const {
    if (m) return *m;
    if (alpha) return static_cast<int>(std::llround(*alpha * n));
    throw PreconditionError("neither m nor alpha given");
}

double ExperimentConfig::resolved_eta() const {
    if (eta) return *eta;
    if (n < 2) throw PreconditionError("default eta needs n >= 2");
    return 3.0 * std::log(static_cast<double>(n)) / n;
}

int ExperimentConfig::resolved_k() const {
    if (k) return *k;
    return std::max(1, n / 10);
}

ConstraintSpec ExperimentConfig::resolved_spec() const {
    if (kappa && !intervals.empty())
        throw PreconditionError("give kappa or intervals, not both");
    if (!intervals.empty()) {
        ConstraintSpec spec = IntervalUnion{intervals};
        validate_spec(spec);
        return spec;
    }
    return HalfSpace{kappa ? *kappa : 0.0};
}

void ExperimentConfig::validate() const {
    if (!known_kind(kind)) throw PreconditionError("unknown experiment kind '" + kind + "'");
    if (threads < 1) throw PreconditionError("threads must be at least 1");
    resolved_spec();  // rejects kappa+intervals and malformed interval lists

    const bool needs_instance = kind == "gen" || kind == "enumerate" || kind == "fragility" ||
                                kind == "pipeline" || kind == "stability" || kind == "success";
    const bool can_load = kind == "enumerate" || kind == "fragility" || kind == "pipeline";
    if (needs_instance && !(can_load && !in_instance.empty())) {
        if (n < 1 || n > kMaxSpins)
            throw PreconditionError("n must be in [1, 32] for kind '" + kind + "'");
        if (m && alpha) throw PreconditionError("give m or alpha, not both");
        if (!m && !alpha) throw PreconditionError("kind '" + kind + "' needs m or alpha");
        if (resolved_m() < 0) throw PreconditionError("m must be nonnegative");
    }
    if (kind == "gen" && out_instance.empty())
        throw PreconditionError("gen needs out_instance");
    if ((kind == "partition-test" || kind == "pitt-test") && cases == 0)
        throw PreconditionError("kind '" + kind + "' needs cases >= 1");
    if (kind != "gen" && kind != "enumerate" && kind != "fragility" && kind != "partition-test" &&
        samples == 0)
        throw PreconditionError("kind '" + kind + "' needs samples >= 1");
}

void apply_config_entry(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "kind") cfg.kind = value;
    else if (key == "n") cfg.n = static_cast<int>(parse_int(key, value));
    else if (key == "m") cfg.m = static_cast<int>(parse_int(key, value));
    else if (key == "alpha") cfg.alpha = parse_double(key, value);
    else if (key == "kappa") cfg.kappa = parse_double(key, value);
    else if (key == "intervals") cfg.intervals = parse_intervals(key, value);
    else if (key == "eta") cfg.eta = parse_double(key, value);
    else if (key == "k") cfg.k = static_cast<int>(parse_int(key, value));
    else if (key == "iota") cfg.iota = parse_double(key, value);
    else if (key == "samples") cfg.samples = parse_u64(key, value);
    else if (key == "cases") cfg.cases = parse_u64(key, value);
    else if (key == "seed") cfg.seed = parse_u64(key, value);
    else if (key == "omega") cfg.omega = parse_u64(key, value);
    else if (key == "algorithm") cfg.algorithm = value;
    else if (key == "rho_budget") cfg.rho_budget = parse_double(key, value);
    else if (key == "exploratory") cfg.exploratory = parse_bool(key, value);
    else if (key == "threads") cfg.threads = static_cast<int>(parse_int(key, value));
    else if (key == "out_report") cfg.out_report = value;
    else if (key == "out_csv") cfg.out_csv = value;
    else if (key == "out_instance") cfg.out_instance = value;
    else if (key == "in_instance") cfg.in_instance = value;
    else throw FormatError("unknown config key '" + key + "'");
}

ExperimentConfig parse_config_file(const std::string& path, ExperimentConfig base) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config file '" + path + "'");
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw FormatError("config line " + std::to_string(lineno) +
                              " is not a `key = value` pair");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw FormatError("config line " + std::to_string(lineno) + " has an empty key");
        apply_config_entry(base, key, value);
    }
    return base;
}

// ---------------------------------------------------------------------------
// binary instance container

namespace {

void put_u32(std::string& b, std::uint32_t v) {
    for (int s = 0; s < 32; s += 8) b.push_back(static_cast<char>((v >> s) & 0xFF));
}

void put_u64(std::string& b, std::uint64_t v) {
    for (int s = 0; s < 64; s += 8) b.push_back(static_cast<char>((v >> s) & 0xFF));
}

void put_f64(std::string& b, double v) { put_u64(b, std::bit_cast<std::uint64_t>(v)); }

struct ByteReader {
    const std::string& buf;
    std::size_t at = 0;

    void need(std::size_t len) const {
        if (at + len > buf.size()) throw FormatError("truncated instance file");
    }
    std::uint8_t u8() {
        need(1);
        return static_cast<std::uint8_t>(buf[at++]);
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int s = 0; s < 32; s += 8)
            v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(buf[at++])) << s;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int s = 0; s < 64; s += 8)
            v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(buf[at++])) << s;
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
};

std::string serialize_instance(const DisorderInstance& inst) {
    std::string b = "PGL1";
    put_u32(b, 1);
    put_u32(b, static_cast<std::uint32_t>(inst.n));
    put_u32(b, static_cast<std::uint32_t>(inst.m));
    put_u64(b, inst.seed);
    if (const auto* hs = std::get_if<HalfSpace>(&inst.spec)) {
        b.push_back('\0');
        put_f64(b, hs->kappa);
    } else {
        const auto& iu = std::get<IntervalUnion>(inst.spec);
        b.push_back('\1');
        put_u32(b, static_cast<std::uint32_t>(iu.intervals.size()));
        for (const auto& [lo, hi] : iu.intervals) {
            put_f64(b, lo);
            put_f64(b, hi);
        }
    }
    for (double e : inst.g) put_f64(b, e);
    return b;
}

std::string read_file_bytes(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream out;
    out << f.rdbuf();
    if (f.bad()) throw IoError("read failure on '" + path + "'");
    return out.str();
}

}  // namespace

void save_instance(const DisorderInstance& inst, const std::string& path) {
    const std::string bytes = serialize_instance(inst);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    f.flush();
    if (!f) throw IoError("write failure on '" + path + "'");
}

DisorderInstance load_instance(const std::string& path) {
    const std::string bytes = read_file_bytes(path);
    ByteReader r{bytes};
    r.need(4);
    if (bytes.compare(0, 4, "PGL1") != 0) throw FormatError("bad instance file magic");
    r.at = 4;
    const std::uint32_t version = r.u32();
    if (version != 1)
        throw FormatError("unsupported instance file version " + std::to_string(version));
    const std::uint32_t n = r.u32();
    const std::uint32_t m = r.u32();
    if (n < 1 || n > static_cast<std::uint32_t>(kMaxSpins))
        throw FormatError("instance file n out of range");
    const std::uint64_t seed = r.u64();
    ConstraintSpec spec;
    const std::uint8_t tag = r.u8();
    if (tag == 0) {
        spec = HalfSpace{r.f64()};
    } else if (tag == 1) {
        const std::uint32_t l = r.u32();
        IntervalUnion iu;
        for (std::uint32_t i = 0; i < l; ++i) {
            const double lo = r.f64();
            const double hi = r.f64();
            iu.intervals.emplace_back(lo, hi);
        }
        spec = iu;
    } else {
        throw FormatError("unknown constraint spec tag in instance file");
    }
    std::vector<double> g(static_cast<std::size_t>(m) * n);
    for (auto& e : g) e = r.f64();
    if (r.at != bytes.size()) throw FormatError("trailing bytes in instance file");
    return make_instance(static_cast<int>(n), static_cast<int>(m), std::move(g), spec, seed);
}

std::uint64_t file_digest(const std::string& path) {
    const std::string bytes = read_file_bytes(path);
    return fnv1a64(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size());
}

// ---------------------------------------------------------------------------
// report emission

std::string report_to_string(const Report& r) {
    std::string out;
    out += "[meta]\n";
    out += "format = pgl-report 1\n";
    out += "build = pgl-1.0.0\n";
    out += "timestamp = " + r.timestamp + "\n";
    const auto section = [&out](const char* name,
                                const std::vector<std::pair<std::string, std::string>>& kv) {
        out += std::string("[") + name + "]\n";
        for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
    };
    section("config", r.config);
    section("results", r.results);
    section("verdicts", r.verdicts);
    return out;
}

void write_report(const Report& r, const std::string& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    const std::string s = report_to_string(r);
    f.write(s.data(), static_cast<std::streamsize>(s.size()));
    f.flush();
    if (!f) throw IoError("write failure on '" + path + "'");
}

std::string csv_to_string(const Report& r) {
    std::string out;
    for (std::size_t i = 0; i < r.csv_header.size(); ++i) {
        if (i) out += ',';
        out += r.csv_header[i];
    }
    out += '\n';
    for (const auto& row : r.csv_rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += row[i];
        }
        out += '\n';
    }
    return out;
}

void write_csv(const Report& r, const std::string& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    const std::string s = csv_to_string(r);
    f.write(s.data(), static_cast<std::streamsize>(s.size()));
    f.flush();
    if (!f) throw IoError("write failure on '" + path + "'");
}

// ---------------------------------------------------------------------------
// experiment runners

namespace {

std::string utc_now() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

DisorderInstance resolve_instance(ExperimentConfig& cfg) {
    if (!cfg.in_instance.empty()) {
        DisorderInstance inst = load_instance(cfg.in_instance);
        // the file supplies the dimensions every later default (eta, k)
        // is resolved against
        cfg.n = inst.n;
        cfg.m = inst.m;
        return inst;
    }
    return sample_disorder(cfg.n, cfg.resolved_m(), cfg.seed, cfg.resolved_spec());
}

void kv(std::vector<std::pair<std::string, std::string>>& out, const std::string& key,
        std::string value) {
    out.emplace_back(key, std::move(value));
}

// resolved values only, and never the thread count: reports must be
// byte-identical for any parallelism level
void echo_config(Report& r, const ExperimentConfig& cfg, const DisorderInstance* inst) {
    kv(r.config, "kind", cfg.kind);
    if (inst) {
        kv(r.config, "n", std::to_string(inst->n));
        kv(r.config, "m", std::to_string(inst->m));
        if (cfg.alpha) kv(r.config, "alpha", fmt(*cfg.alpha));
        kv(r.config, "spec", spec_to_string(inst->spec));
        kv(r.config, "instance_seed", std::to_string(inst->seed));
        if (!cfg.in_instance.empty()) kv(r.config, "in_instance", cfg.in_instance);
    } else if (cfg.kind == "stability" || cfg.kind == "success") {
        // per-trial instances are derived from the master seed inside the
        // measurement, so only the shape is config here
        kv(r.config, "n", std::to_string(cfg.n));
        kv(r.config, "m", std::to_string(cfg.resolved_m()));
        if (cfg.alpha) kv(r.config, "alpha", fmt(*cfg.alpha));
        kv(r.config, "spec", spec_to_string(cfg.resolved_spec()));
    }
    kv(r.config, "seed", std::to_string(cfg.seed));
    const bool uses_eta = cfg.kind == "fragility" || cfg.kind == "pipeline" ||
                          cfg.kind == "stability";
    if (uses_eta) kv(r.config, "eta", fmt(cfg.resolved_eta()));
    const bool uses_k = cfg.kind == "enumerate" || cfg.kind == "fragility" ||
                        cfg.kind == "pipeline" || (cfg.kind == "success" && !cfg.iota);
    if (uses_k) kv(r.config, "k", std::to_string(cfg.resolved_k()));
    if (cfg.kind == "success" && cfg.iota) kv(r.config, "iota", fmt(*cfg.iota));
    const bool uses_samples = cfg.kind == "pipeline" || cfg.kind == "stability" ||
                              cfg.kind == "success" || cfg.kind == "pitt-test";
    if (uses_samples) kv(r.config, "samples", std::to_string(cfg.samples));
    if (cfg.kind == "partition-test" || cfg.kind == "pitt-test")
        kv(r.config, "cases", std::to_string(cfg.cases));
    const bool uses_algorithm = cfg.kind == "pipeline" || cfg.kind == "stability" ||
                                cfg.kind == "success";
    if (uses_algorithm) kv(r.config, "algorithm", cfg.algorithm);
    if (cfg.kind == "pipeline") {
        kv(r.config, "omega", std::to_string(cfg.omega));
        kv(r.config, "rho_budget", fmt(cfg.rho_budget));
        kv(r.config, "exploratory", yesno(cfg.exploratory));
    }
    if (!cfg.out_instance.empty()) kv(r.config, "out_instance", cfg.out_instance);
    if (!cfg.out_report.empty()) kv(r.config, "out_report", cfg.out_report);
    if (!cfg.out_csv.empty()) kv(r.config, "out_csv", cfg.out_csv);
}

void run_gen(const ExperimentConfig& cfg, Report& r) {
    const auto inst = sample_disorder(cfg.n, cfg.resolved_m(), cfg.seed, cfg.resolved_spec());
    echo_config(r, cfg, &inst);
    save_instance(inst, cfg.out_instance);
    kv(r.results, "instance_digest", fmt_hex(instance_digest(inst)));
    kv(r.results, "file_digest", fmt_hex(file_digest(cfg.out_instance)));
    kv(r.results, "norm_inf", fmt(norm_inf(inst)));
    r.csv_header = {"row", "norm2", "norm_inf"};
    for (int a = 0; a < inst.m; ++a) {
        KahanSum sq;
        double mx = 0.0;
        for (double e : inst.row(a)) {
            sq.add(e * e);
            mx = std::max(mx, std::fabs(e));
        }
        r.csv_rows.push_back({std::to_string(a), fmt(std::sqrt(sq.value())), fmt(mx)});
    }
}

void run_enumerate(ExperimentConfig& cfg, Report& r) {
    const auto inst = resolve_instance(cfg);
    echo_config(r, cfg, &inst);
    const SolutionSet sols = enumerate_solutions(inst, cfg.threads);
    const int k = cfg.resolved_k();
    const IsolationReport iso = classify_isolation(sols, std::min(k, inst.n));
    const std::vector<int> nearest = nearest_other_distance(sols);

    kv(r.results, "instance_digest", fmt_hex(instance_digest(inst)));
    kv(r.results, "solution_count", std::to_string(sols.size()));
    kv(r.results, "isolated_count", std::to_string(iso.count));
    bool margins_ok = true;
    if (!sols.margins.empty()) {
        const auto [lo, hi] = std::minmax_element(sols.margins.begin(), sols.margins.end());
        kv(r.results, "min_margin", fmt(*lo));
        kv(r.results, "max_margin", fmt(*hi));
        margins_ok = *lo >= 0.0;
    }
    r.csv_header = {"index", "bits", "margin", "nearest_other"};
    for (std::size_t i = 0; i < sols.size(); ++i)
        r.csv_rows.push_back({std::to_string(i), std::to_string(sols.members[i]),
                              fmt(sols.margins[i]), std::to_string(nearest[i])});
    kv(r.verdicts, "margins_nonnegative", passfail(margins_ok));
}

void run_fragility(ExperimentConfig& cfg, Report& r) {
    const auto inst = resolve_instance(cfg);
    echo_config(r, cfg, &inst);
    const SolutionSet sols = enumerate_solutions(inst, cfg.threads);
    const MarginBoundReport mb = verify_margin_bound(inst, sols);
    const FragilityReport fr =
        fragility_report(inst, sols, std::min(cfg.resolved_k(), inst.n), cfg.resolved_eta());

    kv(r.results, "instance_digest", fmt_hex(instance_digest(inst)));
    kv(r.results, "solution_count", std::to_string(sols.size()));
    kv(r.results, "margin_bound", fmt(mb.bound));
    kv(r.results, "margin_isolated_checked", std::to_string(mb.isolated_checked));
    kv(r.results, "margin_violations", std::to_string(mb.violations.size()));
    kv(r.results, "epsilon", fmt(fr.epsilon));
    kv(r.results, "margin_cap", fmt(fr.margin_cap));
    kv(r.results, "norm_event_ok", yesno(fr.norm_event_ok));
    kv(r.results, "isolated_count", std::to_string(fr.isolated_count));
    kv(r.results, "pairs_checked", std::to_string(fr.pairs_checked));
    kv(r.results, "max_probability", fmt(fr.max_probability));
    kv(r.results, "exceedances", std::to_string(fr.exceedances.size()));

    r.csv_header = {"sigma", "tau", "probability"};
    for (const auto& e : fr.exceedances)
        r.csv_rows.push_back({std::to_string(e.sigma), std::to_string(e.tau),
                              fmt(e.probability)});

    kv(r.verdicts, "margin_bound", passfail(mb.ok()));
    kv(r.verdicts, "fragility_bound", passfail(fr.ok()));
    kv(r.verdicts, "norm_event", passfail(fr.norm_event_ok));
    r.theorem_violation = !mb.ok() || !fr.ok();
}

void run_pipeline(ExperimentConfig& cfg, Report& r) {
    const auto inst = resolve_instance(cfg);
    echo_config(r, cfg, &inst);
    const PipelineReport p =
        hardness_pipeline(inst, cfg.algorithm, cfg.omega, cfg.resolved_eta(), cfg.resolved_k(),
                          cfg.rho_budget, cfg.samples, cfg.threads, cfg.exploratory);

    kv(r.results, "instance_digest", fmt_hex(p.base_digest));
    kv(r.results, "locate_radius", fmt(p.locate_radius));
    kv(r.results, "located", yesno(p.located));
    if (p.sigma_star) {
        kv(r.results, "sigma_star_bits", std::to_string(p.sigma_star->bits()));
        kv(r.results, "sigma_star_distance", fmt(p.sigma_star_distance));
    }
    kv(r.results, "cand_size", std::to_string(p.cand.size()));
    kv(r.results, "cand_radius", fmt(p.cand_radius));
    kv(r.results, "cand_diameter", std::to_string(p.cand_diameter));
    kv(r.results, "q_min", fmt(p.q_min));
    kv(r.results, "zero_trials", std::to_string(p.zero_trials));
    kv(r.results, "singleton_trials", std::to_string(p.singleton_trials));
    kv(r.results, "ge2_trials", std::to_string(p.ge2_trials));
    kv(r.results, "s_hat", fmt(p.s_hat));
    kv(r.results, "s_se", fmt(p.s_se));
    kv(r.results, "max_p_tau", fmt(p.max_p_tau));
    kv(r.results, "hypotheses_met", yesno(p.hypotheses_met));
    kv(r.results, "partition_ran", yesno(p.partition_ran));
    kv(r.results, "exploratory_split", yesno(p.exploratory));
    if (p.partition) {
        kv(r.results, "split_sum1", fmt(p.partition->sum1));
        kv(r.results, "split_sum2", fmt(p.partition->sum2));
        kv(r.results, "split_size1", std::to_string(p.partition->c1.size()));
        kv(r.results, "split_size2", std::to_string(p.partition->c2.size()));
    }
    kv(r.results, "active_mode", yesno(p.active_mode));
    if (p.active) {
        kv(r.results, "active_threshold", fmt(p.active->threshold));
        kv(r.results, "active_drift", fmt(p.active->drift));
        kv(r.results, "active_unique_side", yesno(p.active->unique_side));
    }
    kv(r.results, "event_machinery", yesno(p.event_machinery_ok));
    if (!p.machinery_note.empty()) kv(r.results, "machinery_note", p.machinery_note);
    if (p.partition_ran && p.event_machinery_ok) {
        kv(r.results, "e1_hat", fmt(p.e1_hat));
        kv(r.results, "e2_hat", fmt(p.e2_hat));
        kv(r.results, "joint_hat", fmt(p.joint_hat));
        kv(r.results, "pitt_gap", fmt(p.pitt_gap));
        kv(r.results, "pitt_se", fmt(p.pitt_se));
        kv(r.results, "ge2_hat", fmt(p.phase4_ge2_hat));
        kv(r.results, "ge2_se", fmt(p.ge2_se));
    }
    kv(r.results, "final_lhs", fmt(p.final_lhs));
    kv(r.results, "final_rhs", fmt(p.final_rhs));
    kv(r.results, "final_se", fmt(p.final_se));
    kv(r.results, "bound_root", fmt(p.root));
    kv(r.results, "below_root", yesno(p.below_root));
    kv(r.results, "note", p.verdict_note);

    r.csv_header = {"sample_index", "count_in_cand", "is_singleton"};
    for (std::size_t t = 0; t < p.trial_counts.size(); ++t)
        r.csv_rows.push_back({std::to_string(t), std::to_string(p.trial_counts[t]),
                              p.trial_counts[t] == 1 ? "1" : "0"});

    kv(r.verdicts, "q_nonneg", passfail(p.q_nonneg));
    const bool events_ran = p.partition_ran && p.event_machinery_ok;
    kv(r.verdicts, "positive_correlation", events_ran ? passfail(p.pitt_ok) : "skipped");
    kv(r.verdicts, "count_ge2", events_ran ? passfail(p.ge2_ok) : "skipped");
    const bool counting_applies = p.hypotheses_met && p.event_machinery_ok;
    kv(r.verdicts, "counting_bound", counting_applies ? passfail(p.final_ok) : "skipped");
    kv(r.verdicts, "singleton_root", passfail(p.below_root));
    r.theorem_violation = (events_ran && (!p.pitt_ok || !p.ge2_ok)) ||
                          (counting_applies && !p.final_ok);
}

void run_stability(const ExperimentConfig& cfg, Report& r) {
    const auto spec = cfg.resolved_spec();
    echo_config(r, cfg, nullptr);
    const StabilityReport s = measure_stability(
        cfg.algorithm, static_cast<std::uint32_t>(cfg.n),
        static_cast<std::uint32_t>(cfg.resolved_m()), spec, cfg.resolved_eta(), cfg.samples,
        cfg.seed, static_cast<unsigned>(cfg.threads));

    kv(r.results, "trials", std::to_string(s.trials));
    kv(r.results, "mean_sq_distance", fmt(s.mean_sq_distance));
    for (std::size_t i = 0; i < s.quantile_probs.size(); ++i) {
        char key[32];
        std::snprintf(key, sizeof key, "quantile_p%g", s.quantile_probs[i]);
        kv(r.results, key, fmt(s.quantiles[i]));
    }

    r.csv_header = {"trial", "distance", "rho", "t"};
    for (std::size_t i = 0; i < s.distances.size(); ++i) {
        std::vector<std::string> row{std::to_string(i), fmt(s.distances[i]), "", ""};
        if (i < s.survival.size()) {
            row[2] = fmt(s.survival[i].first);
            row[3] = fmt(s.survival[i].second);
        }
        r.csv_rows.push_back(std::move(row));
    }

    bool monotone = true;
    for (std::size_t i = 1; i < s.survival.size(); ++i)
        monotone = monotone && s.survival[i].second <= s.survival[i - 1].second;
    kv(r.verdicts, "survival_nonincreasing", passfail(monotone));
}

void run_success(const ExperimentConfig& cfg, Report& r) {
    const auto spec = cfg.resolved_spec();
    echo_config(r, cfg, nullptr);
    const SuccessMode mode = cfg.iota ? SuccessMode::scaled(*cfg.iota)
                                      : SuccessMode::fixed(static_cast<unsigned>(cfg.resolved_k()));
    const SuccessReport s = measure_success(
        cfg.algorithm, static_cast<std::uint32_t>(cfg.n),
        static_cast<std::uint32_t>(cfg.resolved_m()), spec, mode, cfg.samples, cfg.seed,
        static_cast<unsigned>(cfg.threads));

    kv(r.results, "trials", std::to_string(s.trials));
    kv(r.results, "isolation_k", std::to_string(s.k));
    kv(r.results, "radius", fmt(s.radius));
    kv(r.results, "success_fraction", fmt(s.success_fraction));
    kv(r.results, "success_se", fmt(s.success_se));
    kv(r.results, "isolated_fraction", fmt(s.isolated_fraction));
    kv(r.results, "isolated_se", fmt(s.isolated_se));

    r.csv_header = {"trial", "dist_to_solutions", "dist_to_isolated", "success",
                    "isolated_success"};
    for (std::size_t i = 0; i < s.dist_to_solutions.size(); ++i)
        r.csv_rows.push_back({std::to_string(i), fmt(s.dist_to_solutions[i]),
                              fmt(s.dist_to_isolated[i]),
                              s.dist_to_solutions[i] <= s.radius ? "1" : "0",
                              s.dist_to_isolated[i] <= s.radius ? "1" : "0"});
}

void run_partition_test(const ExperimentConfig& cfg, Report& r) {
    echo_config(r, cfg, nullptr);
    r.csv_header = {"case", "lemma", "length", "r", "sum1", "sum2", "ok"};
    std::uint64_t thirds_bad = 0, halves_bad = 0;

    RngStream thirds_rs(rng::derive_key(cfg.seed, 1));
    for (std::uint64_t c = 0; c < cfg.cases; ++c) {
        const WeightVector w = random_thirds_weights(thirds_rs);
        const PartitionResult res = partition_thirds(w);
        const double third = w.total / 3.0;
        const bool ok = res.sum1 >= third && res.sum2 >= third &&
                        res.sum1 * res.sum2 >= 2.0 * w.total * w.total / 9.0;
        thirds_bad += !ok;
        r.csv_rows.push_back({std::to_string(c), "thirds", std::to_string(w.p.size()),
                              fmt(w.total), fmt(res.sum1), fmt(res.sum2), ok ? "1" : "0"});
    }
    RngStream halves_rs(rng::derive_key(cfg.seed, 2));
    for (std::uint64_t c = 0; c < cfg.cases; ++c) {
        const WeightVector w = random_halves_weights(halves_rs);
        const PartitionResult res = partition_halves(w);
        const bool ok = res.sum1 >= 0.49 * w.total && res.sum2 >= 0.49 * w.total;
        halves_bad += !ok;
        r.csv_rows.push_back({std::to_string(c), "halves", std::to_string(w.p.size()),
                              fmt(w.total), fmt(res.sum1), fmt(res.sum2), ok ? "1" : "0"});
    }

    kv(r.results, "cases_per_lemma", std::to_string(cfg.cases));
    kv(r.results, "thirds_violations", std::to_string(thirds_bad));
    kv(r.results, "halves_violations", std::to_string(halves_bad));
    kv(r.verdicts, "thirds", passfail(thirds_bad == 0));
    kv(r.verdicts, "halves", passfail(halves_bad == 0));
    r.theorem_violation = thirds_bad + halves_bad > 0;
}

void run_pitt_test(const ExperimentConfig& cfg, Report& r) {
    echo_config(r, cfg, nullptr);
    r.csv_header = {"case", "dim", "samples", "p_a", "p_b", "p_joint", "gap", "se", "ok"};
    std::uint64_t soft_bad = 0, hard_bad = 0;
    double worst = kInfinity;  // most negative gap measured in SEs

    for (std::uint64_t c = 0; c < cfg.cases; ++c) {
        const PittSetup setup = random_pitt_setup(rng::derive_key(cfg.seed, 2 * c));
        const PittReport p =
            pitt_check(setup.cov, setup.mean, setup.event_a, setup.event_b, cfg.samples,
                       rng::derive_key(cfg.seed, 2 * c + 1), cfg.threads);
        soft_bad += !p.ok3();
        hard_bad += !p.ok5();
        if (p.se > 0.0) worst = std::min(worst, p.gap / p.se);
        r.csv_rows.push_back({std::to_string(c), std::to_string(p.dim),
                              std::to_string(p.samples), fmt(p.p_a), fmt(p.p_b), fmt(p.p_joint),
                              fmt(p.gap), fmt(p.se), p.ok3() ? "1" : "0"});
    }

    kv(r.results, "cases", std::to_string(cfg.cases));
    kv(r.results, "gaps_below_3se", std::to_string(soft_bad));
    kv(r.results, "gaps_below_5se", std::to_string(hard_bad));
    if (std::isfinite(worst)) kv(r.results, "min_gap_in_se", fmt(worst));
    kv(r.verdicts, "positive_correlation_3se", passfail(soft_bad == 0));
    kv(r.verdicts, "positive_correlation_5se", passfail(hard_bad == 0));
    r.theorem_violation = soft_bad > 0;
}

}  // namespace

Report run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    ExperimentConfig c = cfg;  // loaded instance files backfill n/m into this copy
    Report r;
    r.timestamp = utc_now();
    if (c.kind == "gen") run_gen(c, r);
    else if (c.kind == "enumerate") run_enumerate(c, r);
    else if (c.kind == "fragility") run_fragility(c, r);
    else if (c.kind == "pipeline") run_pipeline(c, r);
    else if (c.kind == "stability") run_stability(c, r);
    else if (c.kind == "success") run_success(c, r);
    else if (c.kind == "partition-test") run_partition_test(c, r);
    else run_pitt_test(c, r);
    kv(r.verdicts, "theorem_violation", yesno(r.theorem_violation));
    if (!c.out_report.empty()) write_report(r, c.out_report);
    if (!c.out_csv.empty()) write_csv(r, c.out_csv);
    return r;
}

}  // namespace pgl
