#include "pqchain/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "pqchain/errors.hpp"

namespace pqchain::analytics {
namespace {

constexpr auto ML = SigFamily::ML_DSA_65;
constexpr auto SLH = SigFamily::SLH_DSA_SHAKE_192S;

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

double to_number(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(value, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != value.size() || value.empty()) throw SchemaError("config " + key + ": not a number: '" + value + "'");
    return v;
}

double mean(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

std::string id_of(KexMode kex, const Placement& p) { return compose_scenario_id(kex, p); }

std::string legacy_id_of(KexMode kex, SigFamily f) { return *legacy_scenario_id(kex, Placement{f, std::nullopt, f}); }

PairDelta make_delta(std::string label, const Row& from, const Row& to) {
    const auto& a = from.agg;
    const auto& b = to.agg;
    PairDelta d;
    d.label = std::move(label);
    d.from_id = a.scenario_id;
    d.to_id = b.scenario_id;
    d.from_elapsed_ms = a.elapsed_mean_ms;
    d.to_elapsed_ms = b.elapsed_mean_ms;
    d.delta_elapsed_ms = b.elapsed_mean_ms - a.elapsed_mean_ms;
    d.latency_ratio = b.elapsed_mean_ms / a.elapsed_mean_ms;
    d.from_bytes_read = a.bytes_read_mean;
    d.to_bytes_read = b.bytes_read_mean;
    d.delta_bytes_read = b.bytes_read_mean - a.bytes_read_mean;
    d.bytes_read_ratio = b.bytes_read_mean / a.bytes_read_mean;
    d.delta_chain_bytes_unique = b.chain_bytes_unique - a.chain_bytes_unique;
    d.from_server_ms = a.server_task_clock_per_run_ms;
    d.to_server_ms = b.server_task_clock_per_run_ms;
    d.delta_server_ms = b.server_task_clock_per_run_ms - a.server_task_clock_per_run_ms;
    d.server_ratio = b.server_task_clock_per_run_ms / a.server_task_clock_per_run_ms;
    return d;
}

bool in_subset(const Row& r, Subset s) {
    switch (s) {
        case Subset::All: return true;
        case Subset::NonLeafSlh: return !r.flags.leaf_slh;
        case Subset::LeafSlhOnly: return r.flags.leaf_slh;
    }
    return false;
}

bool has_class(const PlacementClass& f, PlacementClassName c) {
    switch (c) {
        case PlacementClassName::AllMl: return f.all_ml;
        case PlacementClassName::RootSlhLeafNotSlh: return f.root_slh_leaf_not_slh;
        case PlacementClassName::IntermediateSlhAny: return f.intermediate_slh_any;
        case PlacementClassName::LeafSlh: return f.leaf_slh;
    }
    return false;
}

}  // namespace

Config parse_config(std::string_view text) {
    Config cfg;
    std::vector<ServiceClass> classes;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw SchemaError("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(std::string_view(t).substr(0, eq));
        const std::string value = trim(std::string_view(t).substr(eq + 1));

        if (key == "baseline_id") {
            cfg.baseline_id = value;
        } else if (key == "price_per_cpu_hour") {
            cfg.price_per_cpu_hour = to_number(key, value);
            if (cfg.price_per_cpu_hour <= 0) throw SchemaError("price_per_cpu_hour must be positive");
        } else if (key == "regime.server_bound_above") {
            cfg.regime_server_bound_above = to_number(key, value);
        } else if (key == "regime.client_skewed_below") {
            cfg.regime_client_skewed_below = to_number(key, value);
        } else if (key == "plausibility.reasonable_max") {
            cfg.plausibility_reasonable_max = to_number(key, value);
        } else if (key == "plausibility.penalized_max") {
            cfg.plausibility_penalized_max = to_number(key, value);
        } else if (key == "plausibility.problematic_max") {
            cfg.plausibility_problematic_max = to_number(key, value);
        } else if (key == "counterexample.ranking") {
            if (value == "weighted_log_ratio")
                cfg.counterexample_ranking = CounterexampleRanking::WeightedLogRatio;
            else if (value == "bytes_diff")
                cfg.counterexample_ranking = CounterexampleRanking::BytesDiff;
            else
                throw SchemaError("counterexample.ranking: unknown value '" + value + "'");
        } else if (key == "counterexample.top_k") {
            const double k = to_number(key, value);
            if (k < 0 || k != std::floor(k)) throw SchemaError("counterexample.top_k must be a nonnegative integer");
            cfg.counterexample_top_k = static_cast<std::size_t>(k);
        } else if (key.rfind("service_class.", 0) == 0 && key.size() > 14) {
            const double daily = to_number(key, value);
            if (daily <= 0) throw SchemaError(key + " must be positive");
            classes.push_back({key.substr(14), daily});
        } else {
            throw SchemaError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
    }
    if (!classes.empty()) cfg.service_classes = std::move(classes);
    if (cfg.regime_client_skewed_below > cfg.regime_server_bound_above)
        throw SchemaError("regime thresholds out of order");
    if (!(cfg.plausibility_reasonable_max <= cfg.plausibility_penalized_max &&
          cfg.plausibility_penalized_max <= cfg.plausibility_problematic_max))
        throw SchemaError("plausibility thresholds out of order");
    return cfg;
}

Config load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot read config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::vector<Row> prepare(const std::vector<bench::RunAggregate>& aggregates) {
    std::vector<Row> rows;
    rows.reserve(aggregates.size());
    for (const auto& a : aggregates) {
        const auto parsed = parse_scenario_id(a.scenario_id);
        if (!parsed) throw SchemaError("unrecognised scenario_id '" + a.scenario_id + "'");
        if (parsed->placement.depth() != a.depth) throw SchemaError(a.scenario_id + ": depth column disagrees with id");
        if (kex_mode_name(parsed->kex) != a.kex_mode) throw SchemaError(a.scenario_id + ": kex_mode column disagrees with id");
        if (try_find_row(rows, a.scenario_id)) throw SchemaError("duplicate scenario_id '" + a.scenario_id + "'");
        Row r{a, parsed->kex, parsed->placement, classify_placement(parsed->placement)};
        if (std::isnan(r.agg.client_taskclock_over_elapsed) || std::isnan(r.agg.server_taskclock_over_elapsed) ||
            std::isnan(r.agg.server_client_taskclock_ratio))
            bench::derive_ratios(r.agg);
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<bench::RunAggregate> paper_fixture() {
    std::istringstream in{std::string(paper_fixture_csv())};
    return bench::read_summary_csv(in);
}

const Row* try_find_row(const std::vector<Row>& rows, std::string_view id) {
    for (const auto& r : rows)
        if (r.agg.scenario_id == id) return &r;
    return nullptr;
}

const Row& find_row(const std::vector<Row>& rows, std::string_view id) {
    if (const Row* r = try_find_row(rows, id)) return *r;
    throw SchemaError("scenario '" + std::string(id) + "' not present in input");
}

NormalizedRow normalize_row(const Row& r, const Row& baseline) {
    return NormalizedRow{r.agg.scenario_id, r.agg.elapsed_mean_ms / baseline.agg.elapsed_mean_ms,
                         r.agg.bytes_read_mean / baseline.agg.bytes_read_mean,
                         r.agg.server_task_clock_per_run_ms / baseline.agg.server_task_clock_per_run_ms};
}

std::vector<NormalizedRow> normalize_to_baseline(const std::vector<Row>& rows, std::string_view baseline_id) {
    const Row* base = try_find_row(rows, baseline_id);
    if (!base) throw SchemaError("baseline '" + std::string(baseline_id) + "' not present in input");
    std::vector<NormalizedRow> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(normalize_row(r, *base));
    return out;
}

std::string slh_position_class(const Placement& p) {
    std::vector<std::string> parts;
    if (p.root == SLH) parts.emplace_back("root");
    if (p.intermediate == SLH) parts.emplace_back("intermediate");
    if (p.leaf == SLH) parts.emplace_back("leaf");
    if (parts.empty()) return "no_slh";
    std::string out = parts[0];
    for (std::size_t i = 1; i < parts.size(); ++i) out += "_and_" + parts[i];
    return out;
}

std::vector<CampaignAPair> campaignA_pairs(const std::vector<Row>& rows) {
    std::vector<CampaignAPair> out;
    for (KexMode kex : {KexMode::CLASSICAL, KexMode::HYBRID, KexMode::PURE_PQC}) {
        const Row* ml = try_find_row(rows, legacy_id_of(kex, ML));
        const Row* slh = try_find_row(rows, legacy_id_of(kex, SLH));
        if (!ml || !slh) continue;
        const auto& a = ml->agg;
        const auto& b = slh->agg;
        out.push_back(CampaignAPair{kex, a.scenario_id, b.scenario_id, a.elapsed_mean_ms, b.elapsed_mean_ms,
                                    b.elapsed_mean_ms / a.elapsed_mean_ms, a.bytes_read_mean, b.bytes_read_mean,
                                    b.bytes_read_mean / a.bytes_read_mean, a.server_task_clock_per_run_ms,
                                    b.server_task_clock_per_run_ms,
                                    b.server_task_clock_per_run_ms / a.server_task_clock_per_run_ms,
                                    a.client_task_clock_per_run_ms, b.client_task_clock_per_run_ms,
                                    b.client_task_clock_per_run_ms / a.client_task_clock_per_run_ms});
    }
    return out;
}

std::vector<StrategyRow> strategy_matrix(const std::vector<Row>& rows, std::string_view baseline_id) {
    const Row& base = find_row(rows, baseline_id);
    std::vector<StrategyRow> out;
    for (const auto& r : rows) {
        if (r.kex != KexMode::HYBRID || r.placement.depth() != 3) continue;
        out.push_back(StrategyRow{r.agg.scenario_id, slh_position_class(r.placement), r.agg.elapsed_mean_ms,
                                  r.agg.bytes_read_mean, r.agg.server_task_clock_per_run_ms, normalize_row(r, base)});
    }
    std::stable_sort(out.begin(), out.end(), [](const StrategyRow& a, const StrategyRow& b) {
        return a.normalized.latency_relative_to_baseline < b.normalized.latency_relative_to_baseline;
    });
    return out;
}

std::string_view placement_class_name(PlacementClassName c) {
    switch (c) {
        case PlacementClassName::AllMl: return "all_ml";
        case PlacementClassName::RootSlhLeafNotSlh: return "root_slh_leaf_not_slh";
        case PlacementClassName::IntermediateSlhAny: return "intermediate_slh_any";
        case PlacementClassName::LeafSlh: return "leaf_slh";
    }
    return "?";
}

std::vector<PlacementStats> placement_summary(const std::vector<Row>& rows, std::string_view baseline_id) {
    const Row& base = find_row(rows, baseline_id);
    std::vector<PlacementStats> out;
    for (auto cls : {PlacementClassName::AllMl, PlacementClassName::RootSlhLeafNotSlh,
                     PlacementClassName::IntermediateSlhAny, PlacementClassName::LeafSlh}) {
        std::vector<double> elapsed, lat_rel, bytes_rel, cpu_rel, srv_share, cli_share;
        for (const auto& r : rows) {
            if (!has_class(r.flags, cls)) continue;
            const auto n = normalize_row(r, base);
            elapsed.push_back(r.agg.elapsed_mean_ms);
            lat_rel.push_back(n.latency_relative_to_baseline);
            bytes_rel.push_back(n.bytes_read_relative_to_baseline);
            cpu_rel.push_back(n.server_cpu_relative_to_baseline);
            srv_share.push_back(r.agg.server_taskclock_over_elapsed);
            cli_share.push_back(r.agg.client_taskclock_over_elapsed);
        }
        if (elapsed.empty()) continue;
        PlacementStats s;
        s.cls = cls;
        s.n = elapsed.size();
        s.mean_elapsed_ms = mean(elapsed);
        s.median_elapsed_ms = median(elapsed);
        s.min_elapsed_ms = *std::min_element(elapsed.begin(), elapsed.end());
        s.max_elapsed_ms = *std::max_element(elapsed.begin(), elapsed.end());
        s.mean_latency_vs_baseline = mean(lat_rel);
        s.median_latency_vs_baseline = median(lat_rel);
        s.mean_bytes_vs_baseline = mean(bytes_rel);
        s.mean_server_cpu_vs_baseline = mean(cpu_rel);
        s.mean_server_over_elapsed = mean(srv_share);
        s.mean_client_over_elapsed = mean(cli_share);
        out.push_back(s);
    }
    return out;
}

std::vector<PairDelta> depth_pairs(const std::vector<Row>& rows, std::vector<std::string>* warnings) {
    constexpr auto H = KexMode::HYBRID;
    struct Spec {
        const char* label;
        Placement d2;
        Placement d3;
    };
    const Spec specs[] = {
        {"ML/ML", {ML, std::nullopt, ML}, {ML, ML, ML}},
        {"SLH root + ML leaf", {SLH, std::nullopt, ML}, {SLH, ML, ML}},
        {"ML root + SLH leaf (ML intermediate)", {ML, std::nullopt, SLH}, {ML, ML, SLH}},
        {"ML root + SLH leaf (SLH intermediate)", {ML, std::nullopt, SLH}, {ML, SLH, SLH}},
        {"SLH/SLH (ML intermediate)", {SLH, std::nullopt, SLH}, {SLH, ML, SLH}},
        {"SLH/SLH (SLH intermediate)", {SLH, std::nullopt, SLH}, {SLH, SLH, SLH}},
    };
    std::vector<PairDelta> out;
    for (const auto& s : specs) {
        const Row* a = try_find_row(rows, id_of(H, s.d2));
        const Row* b = try_find_row(rows, id_of(H, s.d3));
        if (!a || !b) {
            if (warnings) warnings->push_back(std::string("depth pair '") + s.label + "' skipped: member missing");
            continue;
        }
        out.push_back(make_delta(s.label, *a, *b));
    }
    return out;
}

std::vector<KexPair> kex_pairs(const std::vector<Row>& rows, std::vector<std::string>* warnings) {
    constexpr auto C = KexMode::CLASSICAL;
    constexpr auto H = KexMode::HYBRID;
    constexpr auto P = KexMode::PURE_PQC;
    struct Spec {
        KexMode from, to;
        std::string from_id, to_id;
        Placement placement;
    };
    const Placement mlml{ML, std::nullopt, ML};
    const Placement slhslh{SLH, std::nullopt, SLH};
    const Placement slh_ml_ml{SLH, ML, ML};
    const std::vector<Spec> specs{
        {C, H, legacy_id_of(C, ML), legacy_id_of(H, ML), mlml},
        {C, H, legacy_id_of(C, SLH), legacy_id_of(H, SLH), slhslh},
        {H, P, id_of(H, mlml), id_of(P, mlml), mlml},
        {H, P, id_of(H, slh_ml_ml), id_of(P, slh_ml_ml), slh_ml_ml},
        {H, P, id_of(H, slhslh), id_of(P, slhslh), slhslh},
    };
    std::vector<KexPair> out;
    for (const auto& s : specs) {
        Scenario probe;
        probe.placement = s.placement;
        const std::string family =
            probe.hierarchy_label() + " (depth " + std::to_string(s.placement.depth()) + ")";
        const std::string comparison =
            std::string(kex_mode_name(s.from)) + "_vs_" + std::string(kex_mode_name(s.to));
        const Row* a = try_find_row(rows, s.from_id);
        const Row* b = try_find_row(rows, s.to_id);
        if (!a || !b) {
            if (warnings) warnings->push_back("kex pair " + comparison + " '" + family + "' skipped: member missing");
            continue;
        }
        out.push_back(KexPair{comparison, family, s.from, s.to, s.placement.leaf, s.placement.depth(),
                              make_delta(family, *a, *b)});
    }
    return out;
}

std::string_view subset_name(Subset s) {
    switch (s) {
        case Subset::All: return "all_scenarios";
        case Subset::NonLeafSlh: return "non_leaf_slh";
        case Subset::LeafSlhOnly: return "leaf_slh_only";
    }
    return "?";
}

std::string_view metric_name(Metric m) { return m == Metric::BytesRead ? "bytes_read_mean" : "chain_bytes_unique"; }

double metric_value(const Row& r, Metric m) {
    return m == Metric::BytesRead ? r.agg.bytes_read_mean : r.agg.chain_bytes_unique;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("pearson needs two equal-length samples");
    const double mx = mean(x);
    const double my = mean(y);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0 || syy == 0) throw std::domain_error("correlation undefined: zero variance");
    return sxy / std::sqrt(sxx * syy);
}

std::vector<double> average_ranks(const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
        i = j + 1;
    }
    return ranks;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    return pearson(average_ranks(x), average_ranks(y));
}

Correlation correlate(const std::vector<Row>& rows, Subset subset, Metric metric) {
    std::vector<double> x, y;
    for (const auto& r : rows) {
        if (!in_subset(r, subset)) continue;
        const double m = metric_value(r, metric);
        if (std::isnan(m) || std::isnan(r.agg.elapsed_mean_ms)) continue;
        x.push_back(m);
        y.push_back(r.agg.elapsed_mean_ms);
    }
    if (x.size() < 3)
        throw std::domain_error(std::string("correlation ") + std::string(subset_name(subset)) + "/" +
                                std::string(metric_name(metric)) + " needs at least 3 rows");
    return Correlation{subset, metric, x.size(), pearson(x, y), spearman(x, y)};
}

std::vector<Counterexample> counterexamples(const std::vector<Row>& rows, Metric metric,
                                            CounterexampleRanking ranking, std::size_t top_k) {
    std::vector<Counterexample> out;
    for (const auto& a : rows) {
        for (const auto& b : rows) {
            const double ma = metric_value(a, metric);
            const double mb = metric_value(b, metric);
            if (std::isnan(ma) || std::isnan(mb)) continue;
            if (!(ma > mb && a.agg.elapsed_mean_ms < b.agg.elapsed_mean_ms)) continue;
            Counterexample c;
            c.metric = metric;
            c.more_bytes_id = a.agg.scenario_id;
            c.fewer_bytes_id = b.agg.scenario_id;
            c.more_bytes = ma;
            c.fewer_bytes = mb;
            c.bytes_diff = ma - mb;
            c.lower_latency_ms = a.agg.elapsed_mean_ms;
            c.higher_latency_ms = b.agg.elapsed_mean_ms;
            c.latency_ratio = c.higher_latency_ms / c.lower_latency_ms;
            c.score = ranking == CounterexampleRanking::BytesDiff ? c.bytes_diff
                                                                  : c.bytes_diff * std::log(c.latency_ratio);
            out.push_back(std::move(c));
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const Counterexample& x, const Counterexample& y) {
        if (x.score != y.score) return x.score > y.score;
        if (x.more_bytes_id != y.more_bytes_id) return x.more_bytes_id < y.more_bytes_id;
        return x.fewer_bytes_id < y.fewer_bytes_id;
    });
    if (top_k && out.size() > top_k) out.resize(top_k);
    for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = i + 1;
    return out;
}

std::string_view regime_name(RegimeLabel l) {
    switch (l) {
        case RegimeLabel::Balanced: return "balanced";
        case RegimeLabel::ClientSkewed: return "client_skewed";
        case RegimeLabel::OverwhelminglyServerBound: return "overwhelmingly_server_bound";
    }
    return "?";
}

RegimeLabel regime_label(double ratio, const Config& cfg) {
    if (ratio > cfg.regime_server_bound_above) return RegimeLabel::OverwhelminglyServerBound;
    if (ratio < cfg.regime_client_skewed_below) return RegimeLabel::ClientSkewed;
    return RegimeLabel::Balanced;
}

std::string_view perf_group_name(PerfGroup g) {
    switch (g) {
        case PerfGroup::AllMl: return "all_ml";
        case PerfGroup::RootSlhLeafMl: return "root_slh_leaf_ml";
        case PerfGroup::LeafSlh: return "leaf_slh";
    }
    return "?";
}

PerfGroup perf_group(const Placement& p) {
    if (p.leaf == SLH) return PerfGroup::LeafSlh;
    if (p.root == SLH || p.intermediate == SLH) return PerfGroup::RootSlhLeafMl;
    return PerfGroup::AllMl;
}

std::vector<CapacityRow> capacity_model(const std::vector<Row>& rows, std::string_view baseline_id) {
    const Row& base = find_row(rows, baseline_id);
    auto hps = [](const Row& r) {
        const double ms = r.agg.server_task_clock_per_run_ms;
        if (!(ms > 0)) throw SchemaError(r.agg.scenario_id + ": server task clock must be positive");
        return 1000.0 / ms;
    };
    const double base_hps = hps(base);
    std::vector<CapacityRow> out;
    for (const auto& r : rows) {
        const double h = hps(r);
        const double retained = h / base_hps;
        out.push_back(CapacityRow{r.agg.scenario_id, r.agg.kex_mode, r.agg.depth, h, 3600.0 * h, retained,
                                  1.0 / retained, perf_group(r.placement)});
    }
    std::stable_sort(out.begin(), out.end(), [](const CapacityRow& a, const CapacityRow& b) {
        return a.handshakes_per_core_second > b.handshakes_per_core_second;
    });
    return out;
}

std::vector<EconomicRow> economic_model(const std::vector<Row>& rows, const Config& cfg) {
    if (!(cfg.price_per_cpu_hour > 0)) throw SchemaError("price_per_cpu_hour must be positive");
    const Row& base = find_row(rows, cfg.baseline_id);
    auto cost = [&](const Row& r) {
        return r.agg.server_task_clock_per_run_ms / 1000.0 * 1e6 / 3600.0 * cfg.price_per_cpu_hour;
    };
    const double base_cost = cost(base);
    std::vector<EconomicRow> out;
    for (const auto& r : rows) {
        EconomicRow e;
        e.scenario_id = r.agg.scenario_id;
        e.group = perf_group(r.placement);
        e.server_cpu_seconds_per_handshake = r.agg.server_task_clock_per_run_ms / 1000.0;
        e.cpu_hours_per_million = e.server_cpu_seconds_per_handshake * 1e6 / 3600.0;
        e.cost_per_million = e.cpu_hours_per_million * cfg.price_per_cpu_hour;
        e.extra_cost_per_million = e.cost_per_million - base_cost;
        e.cost_multiplier_vs_baseline = e.cost_per_million / base_cost;
        out.push_back(e);
    }
    return out;
}

std::vector<ServiceClassSummary> service_class_summary(const std::vector<EconomicRow>& econ, const Config& cfg) {
    std::vector<ServiceClassSummary> out;
    for (const auto& sc : cfg.service_classes) {
        for (auto g : {PerfGroup::AllMl, PerfGroup::LeafSlh, PerfGroup::RootSlhLeafMl}) {
            std::vector<double> daily, extra;
            for (const auto& e : econ) {
                if (e.group != g) continue;
                daily.push_back(e.cost_per_million * sc.daily_handshakes / 1e6);
                extra.push_back(e.extra_cost_per_million * sc.daily_handshakes / 1e6);
            }
            if (daily.empty()) continue;
            ServiceClassSummary s;
            s.service_class = sc.name;
            s.group = g;
            s.n = daily.size();
            s.mean_daily = mean(daily);
            s.median_daily = median(daily);
            s.mean_extra_daily = mean(extra);
            s.median_extra_daily = median(extra);
            s.mean_monthly = 30 * s.mean_daily;
            s.median_monthly = 30 * s.median_daily;
            s.mean_extra_monthly = 30 * s.mean_extra_daily;
            s.median_extra_monthly = 30 * s.median_extra_daily;
            s.mean_annual = 365 * s.mean_daily;
            s.mean_extra_annual = 365 * s.mean_extra_daily;
            out.push_back(s);
        }
    }
    return out;
}

std::string_view plausibility_name(Plausibility p) {
    switch (p) {
        case Plausibility::Reasonable: return "Reasonable";
        case Plausibility::PenalizedButPlausible: return "Penalized but plausible";
        case Plausibility::OperationallyProblematic: return "Operationally problematic";
        case Plausibility::Unsuitable: return "Unsuitable for interactive TLS front-end";
    }
    return "?";
}

Plausibility plausibility_label(double m, const Config& cfg) {
    if (m <= cfg.plausibility_reasonable_max) return Plausibility::Reasonable;
    if (m <= cfg.plausibility_penalized_max) return Plausibility::PenalizedButPlausible;
    if (m <= cfg.plausibility_problematic_max) return Plausibility::OperationallyProblematic;
    return Plausibility::Unsuitable;
}

std::vector<PlausibilityRow> plausibility_rank(const std::vector<StrategyRow>& strategy, const std::vector<Row>& rows,
                                               const Config& cfg) {
    std::vector<PlausibilityRow> out;
    for (const auto& s : strategy) {
        const Row& r = find_row(rows, s.scenario_id);
        Scenario probe;
        probe.placement = r.placement;
        const double m = s.normalized.latency_relative_to_baseline;
        const Plausibility label = plausibility_label(m, cfg);
        out.push_back(PlausibilityRow{static_cast<int>(label) + 1, s.scenario_id, probe.hierarchy_label(),
                                      s.slh_position, m, s.elapsed_mean_ms, s.server_task_ms, label});
    }
    std::stable_sort(out.begin(), out.end(), [](const PlausibilityRow& a, const PlausibilityRow& b) {
        return a.latency_relative_to_baseline < b.latency_relative_to_baseline;
    });
    return out;
}

Report analyze(const std::vector<bench::RunAggregate>& aggregates, const Config& cfg) {
    const auto rows = prepare(aggregates);
    if (!try_find_row(rows, cfg.baseline_id))
        throw SchemaError("baseline '" + cfg.baseline_id + "' not present in input");

    Report rep;
    rep.campaign_a = campaignA_pairs(rows);
    rep.strategy = strategy_matrix(rows, cfg.baseline_id);
    rep.placement = placement_summary(rows, cfg.baseline_id);
    rep.depth = depth_pairs(rows, &rep.warnings);
    rep.kex = kex_pairs(rows, &rep.warnings);
    for (auto metric : {Metric::BytesRead, Metric::ChainBytesUnique}) {
        for (auto subset : {Subset::All, Subset::NonLeafSlh, Subset::LeafSlhOnly}) {
            try {
                rep.correlations.push_back(correlate(rows, subset, metric));
            } catch (const std::exception& e) {
                rep.warnings.emplace_back(e.what());
            }
        }
    }
    for (auto metric : {Metric::BytesRead, Metric::ChainBytesUnique}) {
        auto list = counterexamples(rows, metric, cfg.counterexample_ranking, cfg.counterexample_top_k);
        rep.counterexamples.insert(rep.counterexamples.end(), list.begin(), list.end());
    }
    for (const auto& r : rows)
        rep.regimes.emplace_back(r.agg.scenario_id, regime_label(r.agg.server_client_taskclock_ratio, cfg));
    rep.capacity = capacity_model(rows, cfg.baseline_id);
    rep.economics = economic_model(rows, cfg);
    rep.service_classes = service_class_summary(rep.economics, cfg);
    rep.plausibility = plausibility_rank(rep.strategy, rows, cfg);
    return rep;
}

}  // namespace pqchain::analytics
