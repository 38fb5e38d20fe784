#include "pqchain/acceptance.hpp"

#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "pqchain/crypto/rng.hpp"
#include "pqchain/errors.hpp"
#include "pqchain/handshake/protocol.hpp"

namespace pqchain::acceptance {
namespace {

constexpr auto ML = SigFamily::ML_DSA_65;
constexpr auto SLH = SigFamily::SLH_DSA_SHAKE_192S;

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// Collects sub-check failures; the criterion passes only when none failed.
class Checklist {
public:
    void rel(const std::string& what, double actual, double expected, double tol) {
        ++count_;
        if (!(std::abs(actual - expected) <= tol * std::abs(expected)))
            fail(what + " = " + num(actual) + ", expected " + num(expected) + " within " + num(tol * 100) + "%");
    }
    void abs(const std::string& what, double actual, double expected, double tol) {
        ++count_;
        if (!(std::abs(actual - expected) <= tol))
            fail(what + " = " + num(actual) + ", expected " + num(expected) + " +/- " + num(tol));
    }
    void eq(const std::string& what, const std::string& actual, const std::string& expected) {
        ++count_;
        if (actual != expected) fail(what + " = '" + actual + "', expected '" + expected + "'");
    }
    void truth(const std::string& what, bool ok) {
        ++count_;
        if (!ok) fail(what);
    }
    void fail(const std::string& msg) { failures_.push_back(msg); }

    CriterionResult result(int id, std::string name, const std::string& ok_detail) const {
        CriterionResult r{id, std::move(name), failures_.empty(), ""};
        if (r.pass) {
            r.detail = ok_detail.empty() ? std::to_string(count_) + " checks" : ok_detail;
        } else {
            r.detail = std::to_string(failures_.size()) + "/" + std::to_string(count_) + " checks failed: " +
                       failures_.front();
            for (std::size_t i = 1; i < failures_.size() && i < 4; ++i) r.detail += "; " + failures_[i];
        }
        return r;
    }

private:
    std::size_t count_ = 0;
    std::vector<std::string> failures_;
};

const analytics::Row* row(const std::vector<analytics::Row>& rows, KexMode kex, const Placement& p) {
    return analytics::try_find_row(rows, compose_scenario_id(kex, p));
}

}  // namespace

std::string format(const CriterionResult& r) {
    return std::string(r.pass ? "PASS" : "FAIL") + " " + std::to_string(r.id) + " " + r.name + ": " + r.detail;
}

CriterionResult check_fixture() {
    using namespace analytics;
    Checklist c;
    const Config cfg;
    const auto agg = paper_fixture();
    const Report rep = analyze(agg, cfg);
    constexpr double kRel = 0.005;

    for (const auto& p : rep.campaign_a) {
        if (p.kex == KexMode::CLASSICAL) c.rel("classical SLH/ML latency ratio", p.latency_ratio, 2127.865, kRel);
        if (p.kex == KexMode::HYBRID) c.rel("hybrid SLH/ML latency ratio", p.latency_ratio, 1682.137, kRel);
    }
    c.truth("campaign A has classical and hybrid pairs", rep.campaign_a.size() == 2);

    auto strategy = [&](const std::string& id) -> const StrategyRow* {
        for (const auto& s : rep.strategy)
            if (s.scenario_id == id) return &s;
        return nullptr;
    };
    const struct {
        Placement p;
        double latency;
    } normalized[] = {{{SLH, ML, ML}, 2.64}, {{ML, ML, SLH}, 1733.49}, {{SLH, SLH, SLH}, 1741.18}};
    for (const auto& n : normalized) {
        const auto* s = strategy(compose_scenario_id(KexMode::HYBRID, n.p));
        c.truth("strategy row " + compose_scenario_id(KexMode::HYBRID, n.p) + " present", s != nullptr);
        if (s) c.rel(s->scenario_id + " latency vs baseline", s->normalized.latency_relative_to_baseline, n.latency, kRel);
    }

    auto depth_ratio = [&](const std::string& label) {
        for (const auto& d : rep.depth)
            if (d.label == label) return d.latency_ratio;
        return std::nan("");
    };
    c.rel("depth ratio SLH root + ML leaf", depth_ratio("SLH root + ML leaf"), 0.6318, kRel);
    c.rel("depth ratio ML/ML", depth_ratio("ML/ML"), 0.9997, kRel);

    const double kex_expected[] = {1.2210, 0.9652, 0.8220, 0.8833, 0.9984};
    c.truth("five kex pairs", rep.kex.size() == 5);
    for (std::size_t i = 0; i < rep.kex.size() && i < 5; ++i) {
        c.rel("kex " + rep.kex[i].comparison + " " + rep.kex[i].family_label, rep.kex[i].values.latency_ratio,
              kex_expected[i], kRel);
    }

    auto corr = [&](Subset s) -> const Correlation* {
        for (const auto& k : rep.correlations)
            if (k.subset == s && k.metric == Metric::BytesRead) return &k;
        return nullptr;
    };
    if (const auto* k = corr(Subset::All)) {
        c.abs("pearson all", k->pearson_r, 0.7493, 0.002);
        c.abs("spearman all", k->spearman_rho, 0.8503, 0.002);
    } else {
        c.fail("correlation over all rows missing");
    }
    if (const auto* k = corr(Subset::NonLeafSlh)) c.abs("pearson non-leaf-SLH", k->pearson_r, 0.9937, 0.002);
    else c.fail("non-leaf-SLH correlation missing");
    if (const auto* k = corr(Subset::LeafSlhOnly)) c.abs("pearson leaf-SLH", k->pearson_r, 0.3518, 0.002);
    else c.fail("leaf-SLH correlation missing");

    const Counterexample* top = nullptr;
    for (const auto& k : rep.counterexamples)
        if (k.metric == Metric::BytesRead && k.rank == 1) top = &k;
    if (top) {
        c.rel("counterexample rank-1 ratio", top->latency_ratio, 416.5316, kRel);
        c.eq("counterexample rank-1 faster", top->more_bytes_id, compose_scenario_id(KexMode::HYBRID, {SLH, std::nullopt, ML}));
        c.eq("counterexample rank-1 slower", top->fewer_bytes_id, compose_scenario_id(KexMode::HYBRID, {ML, std::nullopt, SLH}));
    } else {
        c.fail("no bytes_read counterexample");
    }

    const std::pair<PlacementClassName, double> class_means[] = {{PlacementClassName::AllMl, 0.763},
                                                                {PlacementClassName::RootSlhLeafNotSlh, 2.464},
                                                                {PlacementClassName::IntermediateSlhAny, 1407.253},
                                                                {PlacementClassName::LeafSlh, 1413.171}};
    for (const auto& [cls, expected] : class_means) {
        bool found = false;
        for (const auto& s : rep.placement) {
            if (s.cls != cls) continue;
            found = true;
            c.rel(std::string(placement_class_name(cls)) + " mean elapsed", s.mean_elapsed_ms, expected, kRel);
        }
        c.truth(std::string(placement_class_name(cls)) + " present", found);
    }

    auto capacity = [&](const std::string& id) -> const CapacityRow* {
        for (const auto& k : rep.capacity)
            if (k.scenario_id == id) return &k;
        return nullptr;
    };
    const std::string pure_mlml = compose_scenario_id(KexMode::PURE_PQC, {ML, std::nullopt, ML});
    if (const auto* b = capacity(cfg.baseline_id)) {
        c.rel("baseline handshakes per core-second", b->handshakes_per_core_second, 1779.68, 0.001);
        c.rel("baseline handshakes per vCPU-hour", b->handshakes_per_vcpu_hour, 6406856.76, 0.001);
    } else {
        c.fail("baseline capacity row missing");
    }
    if (const auto* k = capacity(pure_mlml)) {
        c.rel(pure_mlml + " capacity retained", k->capacity_retained_vs_baseline, 1.0906, 0.001);
        c.rel(pure_mlml + " multiplier", k->infrastructure_multiplier_needed, 0.9169, 0.001);
    } else {
        c.fail(pure_mlml + " capacity row missing");
    }

    auto econ = [&](const std::string& id) -> const EconomicRow* {
        for (const auto& e : rep.economics)
            if (e.scenario_id == id) return &e;
        return nullptr;
    };
    const std::string classical_slh = *legacy_scenario_id(KexMode::CLASSICAL, {SLH, std::nullopt, SLH});
    if (const auto* e = econ(cfg.baseline_id)) {
        c.rel("baseline cpu-hours per million", e->cpu_hours_per_million, 0.1561, kRel);
        c.rel("baseline cost per million", e->cost_per_million, 0.006243, kRel);
    } else {
        c.fail("baseline economics row missing");
    }
    if (const auto* e = econ(classical_slh)) {
        c.rel(classical_slh + " cost per million", e->cost_per_million, 16.2476, kRel);
        c.rel(classical_slh + " cost multiplier", e->cost_multiplier_vs_baseline, 2602.40, kRel);
    } else {
        c.fail(classical_slh + " economics row missing");
    }

    auto service = [&](const std::string& cls, PerfGroup g) -> const ServiceClassSummary* {
        for (const auto& s : rep.service_classes)
            if (s.service_class == cls && s.group == g) return &s;
        return nullptr;
    };
    if (const auto* s = service("high_volume_frontend", PerfGroup::AllMl))
        c.rel("high_volume_frontend all_ml mean monthly", s->mean_monthly, 18.87, kRel);
    else
        c.fail("high_volume_frontend all_ml missing");
    if (const auto* s = service("medium_api", PerfGroup::LeafSlh))
        c.rel("medium_api leaf_slh median monthly", s->median_monthly, 4683.01, kRel);
    else
        c.fail("medium_api leaf_slh missing");
    if (const auto* s = service("high_volume_frontend", PerfGroup::LeafSlh))
        c.rel("high_volume_frontend leaf_slh median monthly", s->median_monthly, 46830.11, kRel);
    else
        c.fail("high_volume_frontend leaf_slh missing");

    // Published qualitative_perf_regime column.
    const std::pair<const char*, const char*> regimes[] = {
        {"mlkem768__ml_root__ml_leaf", "balanced"},
        {"mlkem768__slh_root__ml_int__ml_leaf", "client_skewed"},
        {"mlkem768__slh_root__slh_leaf", "overwhelmingly_server_bound"},
        {"x25519__leaf_mldsa65", "balanced"},
        {"x25519__leaf_slhdsashake192s", "overwhelmingly_server_bound"},
        {"x25519mlkem768__leaf_mldsa65", "balanced"},
        {"x25519mlkem768__leaf_slhdsashake192s", "overwhelmingly_server_bound"},
        {"x25519mlkem768__ml_root__ml_int__ml_leaf", "balanced"},
        {"x25519mlkem768__ml_root__ml_int__slh_leaf", "overwhelmingly_server_bound"},
        {"x25519mlkem768__ml_root__ml_leaf", "balanced"},
        {"x25519mlkem768__ml_root__slh_int__slh_leaf", "overwhelmingly_server_bound"},
        {"x25519mlkem768__ml_root__slh_leaf", "overwhelmingly_server_bound"},
        {"x25519mlkem768__slh_root__ml_int__ml_leaf", "client_skewed"},
        {"x25519mlkem768__slh_root__ml_int__slh_leaf", "overwhelmingly_server_bound"},
        {"x25519mlkem768__slh_root__ml_leaf", "balanced"},
        {"x25519mlkem768__slh_root__slh_int__slh_leaf", "overwhelmingly_server_bound"},
        {"x25519mlkem768__slh_root__slh_leaf", "overwhelmingly_server_bound"},
    };
    std::size_t regime_hits = 0;
    for (const auto& [id, expected] : regimes) {
        for (const auto& [rid, label] : rep.regimes) {
            if (rid != id) continue;
            ++regime_hits;
            c.eq(std::string("regime ") + id, std::string(regime_name(label)), expected);
        }
    }
    c.truth("all 17 regime rows present", regime_hits == 17);

    const std::tuple<const char*, int, const char*> plaus[] = {
        {"x25519mlkem768__ml_root__ml_int__ml_leaf", 1, "Reasonable"},
        {"x25519mlkem768__slh_root__ml_int__ml_leaf", 2, "Penalized but plausible"},
        {"x25519mlkem768__ml_root__ml_int__slh_leaf", 4, "Unsuitable for interactive TLS front-end"},
        {"x25519mlkem768__slh_root__ml_int__slh_leaf", 4, "Unsuitable for interactive TLS front-end"},
        {"x25519mlkem768__ml_root__slh_int__slh_leaf", 4, "Unsuitable for interactive TLS front-end"},
        {"x25519mlkem768__slh_root__slh_int__slh_leaf", 4, "Unsuitable for interactive TLS front-end"},
    };
    c.truth("six plausibility rows", rep.plausibility.size() == 6);
    for (std::size_t i = 0; i < rep.plausibility.size() && i < 6; ++i) {
        const auto& [id, rank, label] = plaus[i];
        c.eq("plausibility row " + std::to_string(i + 1), rep.plausibility[i].scenario_id, id);
        c.truth(std::string("plausibility rank of ") + id, rep.plausibility[i].rank == rank);
        c.eq(std::string("plausibility label of ") + id, std::string(plausibility_name(rep.plausibility[i].label)),
             label);
    }
    return c.result(1, "fixture reproduces published tables", "");
}

std::vector<CriterionResult> check_live(const LiveRun& run) {
    using namespace analytics;
    const auto rows = prepare(run.aggregates);
    std::vector<CriterionResult> out;

    {
        Checklist c;
        std::string detail;
        for (KexMode kex : {KexMode::CLASSICAL, KexMode::HYBRID, KexMode::PURE_PQC}) {
            double slowest_ml = 0, fastest_slh = INFINITY;
            for (const auto& r : rows) {
                if (r.kex != kex) continue;
                if (r.placement.leaf == ML) slowest_ml = std::max(slowest_ml, r.agg.elapsed_mean_ms);
                else fastest_slh = std::min(fastest_slh, r.agg.elapsed_mean_ms);
            }
            if (slowest_ml == 0 || !std::isfinite(fastest_slh)) continue;
            const double ratio = fastest_slh / slowest_ml;
            c.truth(std::string(kex_mode_name(kex)) + ": fastest SLH-leaf / slowest ML-leaf = " + num(ratio) + " < 100",
                    ratio >= 100);
            detail += (detail.empty() ? "" : ", ") + std::string(kex_mode_name(kex)) + " min ratio " + num(ratio);
        }
        if (detail.empty()) c.fail("no kex mode has both leaf families");
        out.push_back(c.result(2, "regime separation", detail));
    }
    {
        Checklist c;
        double min_share = INFINITY, min_ratio = INFINITY, ml_lo = INFINITY, ml_hi = 0;
        for (const auto& r : rows) {
            const auto& a = r.agg;
            if (r.flags.leaf_slh) {
                min_share = std::min(min_share, a.server_taskclock_over_elapsed);
                min_ratio = std::min(min_ratio, a.server_client_taskclock_ratio);
                c.truth(a.scenario_id + " server share " + num(a.server_taskclock_over_elapsed) + " < 0.9",
                        a.server_taskclock_over_elapsed >= 0.9);
                c.truth(a.scenario_id + " server/client " + num(a.server_client_taskclock_ratio) + " < 10",
                        a.server_client_taskclock_ratio >= 10);
            }
            if (r.flags.all_ml) {
                ml_lo = std::min(ml_lo, a.server_client_taskclock_ratio);
                ml_hi = std::max(ml_hi, a.server_client_taskclock_ratio);
                c.truth(a.scenario_id + " server/client " + num(a.server_client_taskclock_ratio) + " outside [0.5, 2]",
                        a.server_client_taskclock_ratio >= 0.5 && a.server_client_taskclock_ratio <= 2.0);
            }
        }
        out.push_back(c.result(3, "server-bound decomposition",
                               "leaf-SLH min server share " + num(min_share) + ", min ratio " + num(min_ratio) +
                                   "; all-ML ratios in [" + num(ml_lo) + ", " + num(ml_hi) + "]"));
    }
    {
        Checklist c;
        std::string detail;
        const Row* upper = row(rows, KexMode::HYBRID, {SLH, ML, ML});
        const Row* base = try_find_row(rows, kDefaultBaseline);
        if (upper && base) {
            const double m = upper->agg.elapsed_mean_ms / base->agg.elapsed_mean_ms;
            c.truth("multiplier " + num(m) + " > 20", m <= 20);
            detail = "multiplier " + num(m);
        } else {
            c.fail("scenario or baseline missing");
        }
        out.push_back(c.result(4, "upper-layer bound", detail));
    }
    {
        Checklist c;
        std::string detail;
        const Row* d2 = row(rows, KexMode::HYBRID, {SLH, std::nullopt, ML});
        const Row* d3 = row(rows, KexMode::HYBRID, {SLH, ML, ML});
        if (d2 && d3) {
            c.truth("depth-3 bytes_read not smaller", d3->agg.bytes_read_mean < d2->agg.bytes_read_mean);
            c.truth("depth-3 latency not smaller", d3->agg.elapsed_mean_ms < d2->agg.elapsed_mean_ms);
            detail = "delta bytes_read " + num(d3->agg.bytes_read_mean - d2->agg.bytes_read_mean) + ", latency ratio " +
                     num(d3->agg.elapsed_mean_ms / d2->agg.elapsed_mean_ms);
        } else {
            c.fail("depth pair missing");
        }
        for (const auto& [id, samples] : run.samples)
            for (const auto& s : samples)
                if (s.chain_len_unique != 2) {
                    c.fail(id + " chain_len_unique " + std::to_string(s.chain_len_unique));
                    break;
                }
        out.push_back(c.result(5, "effective-exposure direction", detail + "; chain_len_unique = 2 everywhere"));
    }
    {
        Checklist c;
        const auto list = counterexamples(rows, Metric::BytesRead, CounterexampleRanking::WeightedLogRatio, 0);
        double best = 0;
        std::string pair;
        for (const auto& k : list)
            if (k.latency_ratio > best) {
                best = k.latency_ratio;
                pair = k.more_bytes_id + " vs " + k.fewer_bytes_id;
            }
        c.truth("largest counterexample latency ratio " + num(best) + " < 50", best >= 50);
        out.push_back(c.result(6, "transport-vs-crypto dissociation",
                               std::to_string(list.size()) + " pairs, max ratio " + num(best) + " (" + pair + ")"));
    }
    return out;
}

CriterionResult check_correctness(const std::map<std::string, pki::HierarchyMaterial>& hierarchies,
                                  std::uint64_t now, std::uint64_t rng_seed, int tampers_per_message) {
    Checklist c;
    std::mt19937_64 prng(rng_seed);
    Bytes seed;
    put_u64(seed, rng_seed);
    crypto::SeededRng rng(seed);
    std::size_t handshakes = 0, tampers = 0;

    for (const auto& [id, h] : hierarchies) {
        const auto parsed = parse_scenario_id(id);
        if (!parsed) {
            c.fail("unparseable scenario " + id);
            continue;
        }
        for (auto policy : {pki::ServedChainPolicy::MIRROR_PAPER, pki::ServedChainPolicy::FULL_CHAIN,
                            pki::ServedChainPolicy::LEAF_ONLY}) {
            const std::string where = id + "/" + std::string(pki::policy_name(policy));
            const auto trust = pki::client_trust_store(h, policy);
            const handshake::ServerIdentity identity(pki::served_chain(h, policy), h.leaf.key);
            const auto hello = handshake::client_begin(parsed->kex, rng);
            const auto flight = handshake::server_respond(hello.client_hello, identity, rng);
            const auto messages = handshake::split_server_flight(flight.concatenated());
            try {
                const auto result = handshake::client_complete(messages, hello.state, trust, now);
                handshake::server_finish(flight, result.client_finished);
                c.truth(where + ": master secrets differ",
                        result.secrets.master_secret == flight.secrets.master_secret);
                ++handshakes;
            } catch (const std::exception& e) {
                c.fail(where + ": untampered handshake failed: " + e.what());
                continue;
            }

            for (auto type : {handshake::MsgType::Certificate, handshake::MsgType::CertificateVerify}) {
                const Bytes& original =
                    type == handshake::MsgType::Certificate ? messages.certificate : messages.certificate_verify;
                for (int t = 0; t < tampers_per_message; ++t) {
                    auto tampered = messages;
                    Bytes& target = type == handshake::MsgType::Certificate ? tampered.certificate
                                                                           : tampered.certificate_verify;
                    const std::size_t off = prng() % original.size();
                    target[off] ^= static_cast<std::uint8_t>(1 + prng() % 255);
                    ++tampers;
                    try {
                        handshake::client_complete(tampered, hello.state, trust, now);
                        c.fail(where + ": tampered " + (type == handshake::MsgType::Certificate ? "Certificate" : "CertificateVerify") +
                               " byte " + std::to_string(off) + " accepted");
                    } catch (const std::exception&) {
                    }
                }
            }
        }
    }
    return c.result(7, "handshake correctness",
                    std::to_string(handshakes) + " handshakes agreed, " + std::to_string(tampers) +
                        " single-byte tampers rejected");
}

CriterionResult check_determinism(const std::map<std::string, pki::HierarchyMaterial>& hierarchies, ByteView seed,
                                  std::uint64_t issued_at, const LiveRun& run) {
    Checklist c;
    const auto base = std::filesystem::temp_directory_path() /
                      ("pqchain-determinism-" + std::to_string(std::random_device{}()));
    std::size_t files = 0;
    for (const auto& [id, h] : hierarchies) {
        const auto scenario = find_scenario(id);
        if (!scenario) {
            c.fail("unknown scenario " + id);
            continue;
        }
        const auto again = pki::build_hierarchy(*scenario, seed, issued_at);
        pki::write_hierarchy(h, base / "a" / id);
        pki::write_hierarchy(again, base / "b" / id);
        for (const auto& entry : std::filesystem::directory_iterator(base / "a" / id)) {
            const auto other = base / "b" / id / entry.path().filename();
            auto slurp = [](const std::filesystem::path& p) {
                std::ifstream in(p, std::ios::binary);
                std::stringstream ss;
                ss << in.rdbuf();
                return ss.str();
            };
            c.truth(id + "/" + entry.path().filename().string() + " differs on re-provisioning",
                    std::filesystem::exists(other) && slurp(entry.path()) == slurp(other));
            ++files;
        }
    }
    std::filesystem::remove_all(base);

    std::size_t constant = 0;
    for (const auto& [id, samples] : run.samples) {
        bool same = true;
        for (const auto& s : samples) same = same && s.bytes_read == samples.front().bytes_read;
        c.truth(id + ": bytes_read varies across runs", same);
        constant += same;
    }
    c.truth("no live samples to check", !run.samples.empty());
    return c.result(8, "determinism",
                    std::to_string(files) + " PKI files identical on re-provisioning; bytes_read constant in " +
                        std::to_string(constant) + " scenarios");
}

}  // namespace pqchain::acceptance

namespace pqchain::acceptance {
namespace {

template <typename F>
auto stage(const std::string& name, F&& f) -> decltype(f()) {
    try {
        return f();
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
    } catch (const std::exception& e) {
        throw std::runtime_error(name + ": " + e.what());
    }
}

}  // namespace

std::vector<CriterionResult> run_suite(const SuiteOptions& o) {
    auto log = [&](const std::string& m) {
        if (o.log) o.log(m);
    };
    std::vector<CriterionResult> out;
    out.push_back(stage("analyze", [] { return check_fixture(); }));
    if (o.fixture_only) return out;

    const auto scenarios = enumerate_matrix();
    if (o.workdir) {
        std::filesystem::create_directories(*o.workdir);
        std::ofstream(*o.workdir / "scenarios.json") << scenarios_to_json(scenarios);
    }

    const std::uint64_t issued_at = pki::utc_day_start_now();
    std::map<std::string, pki::HierarchyMaterial> hierarchies;
    stage("provision", [&] {
        for (const auto& s : scenarios) {
            log("provision " + s.scenario_id);
            auto h = pki::build_hierarchy(s, o.seed, issued_at);
            if (o.workdir) pki::write_hierarchy(h, *o.workdir / "pki" / s.scenario_id);
            hierarchies.emplace(s.scenario_id, std::move(h));
        }
        return 0;
    });

    LiveRun run;
    stage("bench", [&] {
        for (const auto& s : scenarios) {
            bench::BenchConfig cfg;
            cfg.runs = s.placement.leaf == SigFamily::SLH_DSA_SHAKE_192S ? o.runs_slh_leaf : o.runs_ml_leaf;
            cfg.warmup_runs = o.warmup;
            log("bench " + s.scenario_id + " (" + std::to_string(*cfg.runs) + " runs)");
            auto samples = bench::run_scenario(s, hierarchies.at(s.scenario_id), cfg);
            run.aggregates.push_back(bench::aggregate(s, samples));
            run.samples.emplace(s.scenario_id, std::move(samples));
        }
        if (o.workdir) bench::write_results(*o.workdir / "results", run.aggregates, run.samples);
        return 0;
    });

    stage("analyze", [&] {
        const analytics::Config cfg;
        const auto report = analytics::analyze(run.aggregates, cfg);
        if (o.workdir) analytics::write_report(report, analytics::prepare(run.aggregates), *o.workdir / "report");
        for (auto& r : check_live(run)) out.push_back(std::move(r));
        return 0;
    });

    log("correctness sweep over all scenarios and policies");
    const auto now = static_cast<std::uint64_t>(std::time(nullptr));
    out.push_back(stage("correctness", [&] { return check_correctness(hierarchies, now, 20240521); }));
    log("re-provisioning for determinism");
    out.push_back(stage("determinism", [&] { return check_determinism(hierarchies, o.seed, issued_at, run); }));
    return out;
}

}  // namespace pqchain::acceptance
