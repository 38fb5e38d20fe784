#include <sys/utsname.h>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "pqchain/acceptance.hpp"
#include "pqchain/analytics.hpp"
#include "pqchain/bench.hpp"
#include "pqchain/crypto/rng.hpp"
#include "pqchain/errors.hpp"
#include "pqchain/handshake/protocol.hpp"
#include "pqchain/pki.hpp"
#include "pqchain/scenario.hpp"

#ifndef PQCHAINLAB_VERSION
#define PQCHAINLAB_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using namespace pqchain;
using json = nlohmann::ordered_json;

namespace {

enum Exit { kOk = 0, kUsage = 1, kCrypto = 2, kTransport = 3, kSchema = 4, kCriteriaFailed = 5 };

class UsageError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, std::string_view data) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    out << data;
    if (!out) throw std::runtime_error("cannot write " + p.string());
}

std::string iso_utc(std::time_t t) {
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string host_description() {
    utsname u{};
    if (uname(&u) != 0) return "unknown";
    return std::string(u.sysname) + " " + u.release + " " + u.machine + " (" + u.nodename + ")";
}

Bytes parse_seed(const std::string& hex) {
    try {
        auto b = from_hex(hex);
        if (b.empty()) throw UsageError("empty seed");
        return b;
    } catch (const UsageError&) {
        throw;
    } catch (const std::exception&) {
        throw UsageError("--seed must be hex: " + hex);
    }
}

std::vector<Scenario> select_campaign(std::vector<Scenario> all, const std::string& campaign) {
    if (campaign.empty()) return all;
    std::vector<Scenario> out;
    for (auto& s : all)
        if (campaign.find(s.campaign) != std::string::npos) out.push_back(std::move(s));
    return out;
}

std::vector<Scenario> load_scenarios(const fs::path& p) {
    if (!fs::exists(p)) throw UsageError(p.string() + " not found; run gen-scenarios first");
    return scenarios_from_json(read_file(p));
}

struct Workdir {
    fs::path root;
    fs::path scenarios() const { return root / "scenarios.json"; }
    fs::path pki() const { return root / "pki"; }
    fs::path results() const { return root / "results"; }
    fs::path report() const { return root / "report"; }
};

// Stage failures keep their error type and gain the stage name.
template <typename F>
void stage(const std::string& name, F&& f) {
    try {
        f();
    } catch (const UsageError&) {
        throw;
    } catch (const handshake::HandshakeError& e) {
        throw CryptoError(name + ": " + e.what());
    } catch (const CryptoError& e) {
        throw CryptoError(name + ": " + e.what());
    } catch (const TransportError& e) {
        throw TransportError(name + ": " + e.what());
    } catch (const SchemaError& e) {
        throw SchemaError(name + ": " + e.what());
    } catch (const DecodeError& e) {
        throw SchemaError(name + ": " + e.what());
    } catch (const CLI::Error&) {
        throw;
    } catch (const std::exception& e) {
        throw std::runtime_error(name + ": " + e.what());
    }
}

// ---- gen-scenarios ----

struct GenOpts {
    std::string campaign;
    std::string out;
};

void cmd_gen(const Workdir& wd, const GenOpts& o) {
    const fs::path out = o.out.empty() ? wd.scenarios() : fs::path(o.out);
    const auto scenarios = select_campaign(enumerate_matrix(), o.campaign);
    write_file(out, scenarios_to_json(scenarios));
    std::cout << "wrote " << scenarios.size() << " scenarios to " << out.string() << "\n";
}

// ---- provision ----

struct ProvisionOpts {
    std::string scenarios;
    std::string seed;
    std::optional<std::uint64_t> issued_at;
};

void cmd_provision(const Workdir& wd, const ProvisionOpts& o) {
    const auto scenarios = load_scenarios(o.scenarios.empty() ? wd.scenarios() : fs::path(o.scenarios));
    Bytes seed;
    if (o.seed.empty()) {
        seed = crypto::OsRng().bytes(32);
    } else {
        seed = parse_seed(o.seed);
    }
    const std::uint64_t issued_at = o.issued_at.value_or(pki::utc_day_start_now());

    json ids = json::array();
    for (const auto& s : scenarios) {
        std::cout << "provision " << s.scenario_id << std::endl;
        const auto h = pki::build_hierarchy(s, seed, issued_at);
        pki::write_hierarchy(h, wd.pki() / s.scenario_id);
        ids.push_back(s.scenario_id);
    }
    json m;
    m["tool"] = "pqchainlab";
    m["version"] = PQCHAINLAB_VERSION;
    m["seed"] = to_hex(seed);
    m["issued_at"] = issued_at;
    m["scenarios"] = ids;
    m["policy"] = nullptr;
    m["created_at"] = iso_utc(std::time(nullptr));
    m["host"] = host_description();
    write_file(wd.pki() / "manifest.json", m.dump(2) + "\n");
}

// ---- bench ----

struct BenchOpts {
    std::vector<std::string> scenario_ids;
    std::string campaign;
    std::optional<int> runs;
    std::optional<int> warmup;
    std::string policy = "mirror";
    std::string seed;
    bool deterministic = false;
    std::uint16_t port = 0;
    std::uint16_t control_port = 0;
};

void cmd_bench(const Workdir& wd, const BenchOpts& o) {
    const auto policy = pki::policy_from_name(o.policy);
    if (!policy) throw UsageError("--policy must be mirror, full or leaf");
    const fs::path manifest_path = wd.pki() / "manifest.json";
    if (!fs::exists(manifest_path)) throw UsageError("no PKI under " + wd.pki().string() + "; run provision first");
    json manifest = json::parse(read_file(manifest_path));

    std::vector<Scenario> selected;
    if (!o.scenario_ids.empty()) {
        for (const auto& id : o.scenario_ids) {
            auto s = find_scenario(id);
            if (!s) throw UsageError("unknown scenario " + id);
            selected.push_back(*s);
        }
    } else {
        for (const auto& id : manifest.at("scenarios")) {
            auto s = find_scenario(id.get<std::string>());
            if (s) selected.push_back(*s);
        }
        selected = select_campaign(std::move(selected), o.campaign);
    }
    if (selected.empty()) throw UsageError("no scenarios selected");

    bench::BenchConfig cfg;
    cfg.runs = o.runs;
    cfg.warmup_runs = o.warmup;
    cfg.policy = *policy;
    cfg.port = o.port;
    cfg.control_port = o.control_port;
    if (o.deterministic)
        cfg.deterministic_seed = o.seed.empty() ? from_hex(manifest.at("seed").get<std::string>()) : parse_seed(o.seed);

    // Rows from earlier bench invocations are kept unless re-measured.
    std::map<std::string, bench::RunAggregate> rows;
    const fs::path summary = wd.results() / "master_summary.csv";
    const fs::path prior_manifest = wd.results() / "manifest.json";
    const bool same_policy = fs::exists(prior_manifest) &&
                             json::parse(read_file(prior_manifest)).value("policy", "") == pki::policy_name(*policy);
    if (fs::exists(summary) && same_policy)
        for (auto& a : bench::load_summary(summary)) rows.emplace(a.scenario_id, std::move(a));

    fs::create_directories(wd.results());
    for (const auto& s : selected) {
        std::vector<bench::HandshakeSample> samples;
        pki::HierarchyMaterial h;
        stage("bench " + s.scenario_id, [&] { h = pki::read_hierarchy(wd.pki() / s.scenario_id); });
        std::cout << "bench " << s.scenario_id << std::flush;
        try {
            // run_scenario names the scenario in its errors.
            stage("bench", [&] {
                samples = bench::run_scenario(s, h, cfg, [](int done, int total) {
                    if (done == total || done % 100 == 0) std::cout << " " << done << "/" << total << std::flush;
                });
            });
        } catch (...) {
            std::cout << std::endl;
            throw;
        }
        std::cout << std::endl;
        bench::write_samples(wd.results() / (s.scenario_id + ".jsonl"), samples);
        rows.insert_or_assign(s.scenario_id, bench::aggregate(s, samples));
    }

    std::vector<bench::RunAggregate> ordered;
    for (const auto& s : enumerate_matrix()) {
        auto it = rows.find(s.scenario_id);
        if (it != rows.end()) ordered.push_back(it->second);
    }
    std::ofstream out(summary);
    bench::write_summary_csv(out, ordered);

    manifest["policy"] = std::string(pki::policy_name(*policy));
    manifest["deterministic"] = o.deterministic;
    manifest["bench_at"] = iso_utc(std::time(nullptr));
    manifest["host"] = host_description();
    write_file(wd.results() / "manifest.json", manifest.dump(2) + "\n");
}

// ---- analyze / report ----

struct AnalyzeOpts {
    std::string input;
    std::string fixture;
    std::string config;
    std::string baseline;
    std::string out;
};

std::vector<bench::RunAggregate> analysis_input(const Workdir& wd, const AnalyzeOpts& o) {
    if (!o.fixture.empty()) {
        if (o.fixture != "paper") throw UsageError("--fixture accepts only 'paper'");
        return analytics::paper_fixture();
    }
    const fs::path in = o.input.empty() ? wd.results() / "master_summary.csv" : fs::path(o.input);
    if (!fs::exists(in)) throw UsageError(in.string() + " not found");
    return bench::load_summary(in);
}

analytics::Config analysis_config(const AnalyzeOpts& o) {
    analytics::Config cfg = o.config.empty() ? analytics::Config{} : analytics::load_config(o.config);
    if (!o.baseline.empty()) cfg.baseline_id = o.baseline;
    return cfg;
}

void cmd_analyze(const Workdir& wd, const AnalyzeOpts& o) {
    const auto aggregates = analysis_input(wd, o);
    const auto cfg = analysis_config(o);
    const fs::path out = o.out.empty() ? wd.report() : fs::path(o.out);
    const auto rep = analytics::analyze(aggregates, cfg);
    analytics::write_report(rep, analytics::prepare(aggregates), out);
    for (const auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << "wrote report to " << out.string() << "\n";
}

void cmd_report(const Workdir& wd, const AnalyzeOpts& o) {
    const auto rep = analytics::analyze(analysis_input(wd, o), analysis_config(o));
    const std::string md = analytics::render_markdown(rep);
    const fs::path out = o.out.empty() ? wd.report() : fs::path(o.out);
    write_file(out / "summary.md", md);
    std::cout << md;
}

// ---- reproduce ----

struct ReproduceOpts {
    bool fixture_only = false;
    int runs_ml_leaf = 50;
    int runs_slh_leaf = 20;
    int warmup = 1;
    std::string seed;
};

int cmd_reproduce(const Workdir& wd, const ReproduceOpts& o) {
    acceptance::SuiteOptions so;
    so.fixture_only = o.fixture_only;
    so.runs_ml_leaf = o.runs_ml_leaf;
    so.runs_slh_leaf = o.runs_slh_leaf;
    so.warmup = o.warmup;
    if (!o.seed.empty()) so.seed = parse_seed(o.seed);
    if (!o.fixture_only) so.workdir = wd.root;
    so.log = [](const std::string& m) { std::cerr << m << std::endl; };

    const auto results = acceptance::run_suite(so);
    bool ok = true;
    for (const auto& r : results) {
        std::cout << acceptance::format(r) << "\n";
        ok = ok && r.pass;
    }
    return ok ? kOk : kCriteriaFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Post-quantum certificate chain handshake laboratory"};
    app.require_subcommand(1);
    app.set_version_flag("--version", PQCHAINLAB_VERSION);

    std::string workdir;
    app.add_option("-C,--workdir", workdir, "Working directory")->envname("PQCHAINLAB_WORKDIR");

    GenOpts gen;
    auto* gen_cmd = app.add_subcommand("gen-scenarios", "Write the scenario matrix");
    gen_cmd->add_option("--campaign", gen.campaign, "Campaign letters to keep, e.g. B or BD");
    gen_cmd->add_option("-o,--out", gen.out, "Output file (default <workdir>/scenarios.json)");

    ProvisionOpts prov;
    auto* prov_cmd = app.add_subcommand("provision", "Generate keys and certificates");
    prov_cmd->add_option("--scenarios", prov.scenarios, "Scenario file (default <workdir>/scenarios.json)");
    prov_cmd->add_option("--seed", prov.seed, "Hex seed; random when omitted, always recorded in the manifest");
    prov_cmd->add_option("--issued-at", prov.issued_at, "notBefore as unix seconds (default start of UTC day)");

    BenchOpts bo;
    auto* bench_cmd = app.add_subcommand("bench", "Run loopback handshakes");
    bench_cmd->add_option("-s,--scenario", bo.scenario_ids, "Scenario id (repeatable; default all provisioned)");
    bench_cmd->add_option("--campaign", bo.campaign, "Campaign letters to keep");
    bench_cmd->add_option("--runs", bo.runs, "Measured runs per scenario")->check(CLI::PositiveNumber);
    bench_cmd->add_option("--warmup", bo.warmup, "Warmup runs per scenario")->check(CLI::NonNegativeNumber);
    bench_cmd->add_option("--policy", bo.policy, "Served chain: mirror, full or leaf")
        ->check(CLI::IsMember({"mirror", "full", "leaf"}));
    bench_cmd->add_option("--seed", bo.seed, "Hex seed for ephemerals with --deterministic");
    bench_cmd->add_flag("--deterministic", bo.deterministic, "Seed handshake ephemerals");
    bench_cmd->add_option("--port", bo.port, "Handshake port (default ephemeral)");
    bench_cmd->add_option("--control-port", bo.control_port, "Control channel port (default ephemeral)");

    AnalyzeOpts ao;
    auto add_analysis_opts = [&ao](CLI::App* cmd) {
        auto* in = cmd->add_option("-i,--input", ao.input, "master_summary.csv (default <workdir>/results)");
        cmd->add_option("--fixture", ao.fixture, "Use a shipped fixture instead of results")
            ->check(CLI::IsMember({"paper"}))
            ->excludes(in);
        cmd->add_option("--config", ao.config, "Analytics config file");
        cmd->add_option("--baseline", ao.baseline, "Baseline scenario id");
        cmd->add_option("-o,--out", ao.out, "Output directory (default <workdir>/report)");
    };
    auto* analyze_cmd = app.add_subcommand("analyze", "Write analytics CSVs and SVG plots");
    add_analysis_opts(analyze_cmd);
    auto* report_cmd = app.add_subcommand("report", "Print a markdown summary");
    add_analysis_opts(report_cmd);

    ReproduceOpts ro;
    auto* repro_cmd = app.add_subcommand("reproduce", "End-to-end desk-scale pipeline with PASS/FAIL checks");
    repro_cmd->add_flag("--fixture-only", ro.fixture_only, "Only check analytics against the shipped fixture");
    repro_cmd->add_option("--runs-fast", ro.runs_ml_leaf, "Runs for ML-leaf scenarios")->check(CLI::PositiveNumber);
    repro_cmd->add_option("--runs-heavy", ro.runs_slh_leaf, "Runs for SLH-leaf scenarios")
        ->check(CLI::PositiveNumber);
    repro_cmd->add_option("--warmup", ro.warmup, "Warmup runs")->check(CLI::NonNegativeNumber);
    repro_cmd->add_option("--seed", ro.seed, "Hex provisioning seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    const Workdir wd{workdir.empty() ? fs::current_path() : fs::path(workdir)};
    try {
        if (*gen_cmd) stage("gen-scenarios", [&] { cmd_gen(wd, gen); });
        if (*prov_cmd) stage("provision", [&] { cmd_provision(wd, prov); });
        if (*bench_cmd) cmd_bench(wd, bo);
        if (*analyze_cmd) stage("analyze", [&] { cmd_analyze(wd, ao); });
        if (*report_cmd) stage("report", [&] { cmd_report(wd, ao); });
        if (*repro_cmd) return cmd_reproduce(wd, ro);
        return kOk;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const handshake::HandshakeError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kCrypto;
    } catch (const CryptoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kCrypto;
    } catch (const TransportError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kTransport;
    } catch (const SchemaError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kSchema;
    } catch (const DecodeError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kSchema;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
}
