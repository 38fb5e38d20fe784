#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pqchain/analytics.hpp"
#include "pqchain/errors.hpp"
#include "support.hpp"

using namespace pqchain;
using namespace pqchain::analytics;

namespace {

const std::vector<Row>& rows() {
    static const auto r = prepare(paper_fixture());
    return r;
}

const Report& report() {
    static const auto r = analyze(paper_fixture(), Config{});
    return r;
}

const nlohmann::json& oracle() {
    static const auto j = testsupport::load_json("analytics_oracle.json");
    return j;
}

void expect_rel(double got, double want, double tol = 1e-9) {
    EXPECT_NEAR(got, want, std::abs(want) * tol) << "want " << want;
}

std::string group_key(PerfGroup g) { return std::string(perf_group_name(g)); }

}  // namespace

// ---- agreement with the independent pandas/scipy recomputation ----

TEST(AnalyticsOracle, CampaignA) {
    ASSERT_EQ(report().campaign_a.size(), 2u);
    expect_rel(report().campaign_a[0].latency_ratio, oracle()["campaign_a_latency_ratio"]["classical"]);
    expect_rel(report().campaign_a[1].latency_ratio, oracle()["campaign_a_latency_ratio"]["hybrid"]);
}

TEST(AnalyticsOracle, StrategyMatrix) {
    const auto& want = oracle()["strategy_latency_vs_baseline"];
    ASSERT_EQ(report().strategy.size(), want.size());
    for (const auto& s : report().strategy)
        expect_rel(s.normalized.latency_relative_to_baseline, want[s.scenario_id].get<double>());
    for (std::size_t i = 1; i < report().strategy.size(); ++i)
        EXPECT_LE(report().strategy[i - 1].normalized.latency_relative_to_baseline,
                  report().strategy[i].normalized.latency_relative_to_baseline);
}

TEST(AnalyticsOracle, PlacementClasses) {
    const auto& want = oracle()["placement"];
    ASSERT_EQ(report().placement.size(), 4u);
    for (const auto& p : report().placement) {
        const auto& w = want[std::string(placement_class_name(p.cls))];
        EXPECT_EQ(p.n, w["n"].get<std::size_t>());
        expect_rel(p.mean_elapsed_ms, w["mean_ms"]);
        expect_rel(p.median_elapsed_ms, w["median_ms"]);
    }
}

TEST(AnalyticsOracle, DepthAndKexPairs) {
    ASSERT_EQ(report().depth.size(), 6u);
    for (std::size_t i = 0; i < 6; ++i) expect_rel(report().depth[i].latency_ratio, oracle()["depth_latency_ratio"][i]);
    ASSERT_EQ(report().kex.size(), 5u);
    for (std::size_t i = 0; i < 5; ++i)
        expect_rel(report().kex[i].values.latency_ratio, oracle()["kex_latency_ratio"][i]);
}

TEST(AnalyticsOracle, Correlations) {
    const auto& want = oracle()["correlations_bytes_read"];
    const std::pair<Subset, const char*> subsets[] = {
        {Subset::All, "all"}, {Subset::NonLeafSlh, "non_leaf_slh"}, {Subset::LeafSlhOnly, "leaf_slh"}};
    for (auto [subset, key] : subsets) {
        const auto c = correlate(rows(), subset, Metric::BytesRead);
        EXPECT_EQ(c.n, want[key]["n"].get<std::size_t>());
        EXPECT_NEAR(c.pearson_r, want[key]["pearson"].get<double>(), 1e-12) << key;
        EXPECT_NEAR(c.spearman_rho, want[key]["spearman"].get<double>(), 1e-12) << key;
    }
}

TEST(AnalyticsOracle, Counterexamples) {
    const auto got = counterexamples(rows(), Metric::BytesRead, CounterexampleRanking::WeightedLogRatio, 5);
    const auto& want = oracle()["counterexamples_top5"];
    ASSERT_EQ(got.size(), 5u);
    for (std::size_t i = 0; i < 5; ++i) {
        EXPECT_EQ(got[i].rank, i + 1);
        EXPECT_EQ(got[i].more_bytes_id, want[i]["more_bytes"]);
        EXPECT_EQ(got[i].fewer_bytes_id, want[i]["fewer_bytes"]);
        expect_rel(got[i].bytes_diff, want[i]["bytes_diff"]);
        expect_rel(got[i].latency_ratio, want[i]["latency_ratio"]);
    }
}

TEST(AnalyticsOracle, CapacityAndEconomics) {
    for (const auto& c : report().capacity) {
        const auto& w = oracle()["capacity"][c.scenario_id];
        expect_rel(c.handshakes_per_core_second, w["hps"]);
        expect_rel(c.capacity_retained_vs_baseline, w["retained"]);
        expect_rel(c.infrastructure_multiplier_needed, w["multiplier"]);
    }
    for (const auto& e : report().economics) {
        const auto& w = oracle()["economics"][e.scenario_id];
        expect_rel(e.cost_per_million, w["cost_per_million"]);
        expect_rel(e.cost_multiplier_vs_baseline, w["multiplier"]);
    }
    ASSERT_EQ(report().service_classes.size(), 9u);
    for (const auto& s : report().service_classes) {
        const auto& w = oracle()["service_class_monthly"][s.service_class][group_key(s.group)];
        expect_rel(s.mean_monthly, w["mean"]);
        expect_rel(s.median_monthly, w["median"]);
    }
}

TEST(AnalyticsOracle, RegimesAndPlausibility) {
    ASSERT_EQ(report().regimes.size(), 17u);
    for (const auto& [id, label] : report().regimes) EXPECT_EQ(regime_name(label), oracle()["regimes"][id]) << id;
    ASSERT_EQ(report().plausibility.size(), 6u);
    for (const auto& p : report().plausibility)
        EXPECT_EQ(plausibility_name(p.label), oracle()["plausibility"][p.scenario_id]) << p.scenario_id;
}

// ---- published values ----

TEST(AnalyticsPublished, HeadlineFigures) {
    expect_rel(report().campaign_a[0].latency_ratio, 2127.865, 0.005);
    expect_rel(report().campaign_a[1].latency_ratio, 1682.137, 0.005);
    const auto all = correlate(rows(), Subset::All, Metric::BytesRead);
    EXPECT_NEAR(all.pearson_r, 0.7493, 0.002);
    EXPECT_NEAR(all.spearman_rho, 0.8503, 0.002);
    EXPECT_NEAR(correlate(rows(), Subset::NonLeafSlh, Metric::BytesRead).pearson_r, 0.9937, 0.002);
    EXPECT_NEAR(correlate(rows(), Subset::LeafSlhOnly, Metric::BytesRead).pearson_r, 0.3518, 0.002);
    expect_rel(report().counterexamples.front().latency_ratio, 416.5316, 0.005);
}

TEST(AnalyticsPublished, RegimeExamples) {
    const auto& r = find_row(rows(), "mlkem768__slh_root__ml_int__ml_leaf");
    EXPECT_EQ(regime_label(r.agg.server_client_taskclock_ratio), RegimeLabel::ClientSkewed);
    const auto& s = find_row(rows(), "x25519mlkem768__slh_root__ml_int__ml_leaf");
    EXPECT_NEAR(s.agg.server_client_taskclock_ratio, 0.3462, 0.0005);
}

TEST(AnalyticsPublished, PlausibilityRanksAreLabelOrdinals) {
    std::vector<int> ranks;
    for (const auto& p : report().plausibility) ranks.push_back(p.rank);
    EXPECT_EQ(ranks, (std::vector<int>{1, 2, 4, 4, 4, 4}));
}

// ---- properties ----

TEST(AnalyticsProperty, SpearmanInvariantUnderMonotoneTransforms) {
    std::mt19937_64 gen(3);
    std::normal_distribution<double> d;
    for (int t = 0; t < 50; ++t) {
        std::vector<double> x, y, fx, gy;
        for (int i = 0; i < 20; ++i) {
            x.push_back(d(gen));
            y.push_back(x.back() + d(gen));
            fx.push_back(std::exp(x.back()));
            gy.push_back(std::pow(y.back(), 3) + 5);
        }
        EXPECT_NEAR(spearman(x, y), spearman(fx, gy), 1e-12);
    }
}

TEST(AnalyticsProperty, PearsonScaleAndShiftInvariant) {
    std::mt19937_64 gen(4);
    std::normal_distribution<double> d;
    for (int t = 0; t < 50; ++t) {
        std::vector<double> x, y, ax;
        for (int i = 0; i < 15; ++i) {
            x.push_back(d(gen));
            y.push_back(2 * x.back() + d(gen));
            ax.push_back(1000 * x.back() - 7);
        }
        EXPECT_NEAR(pearson(x, y), pearson(ax, y), 1e-10);
        EXPECT_NEAR(pearson(x, y), pearson(y, x), 1e-12);
        EXPECT_LE(std::abs(pearson(x, y)), 1.0 + 1e-12);
    }
}

TEST(AnalyticsProperty, AverageRanksHandleTies) {
    EXPECT_EQ(average_ranks({10, 20, 20, 5}), (std::vector<double>{2, 3.5, 3.5, 1}));
}

TEST(AnalyticsProperty, NormalizationIsScaleInvariant) {
    auto scaled = paper_fixture();
    for (auto& a : scaled) {
        a.elapsed_mean_ms *= 3.7;
        a.bytes_read_mean *= 11;
        a.server_task_clock_per_run_ms *= 0.25;
        a.client_task_clock_per_run_ms *= 0.25;
    }
    const auto base = normalize_to_baseline(rows(), kDefaultBaseline);
    const auto other = normalize_to_baseline(prepare(scaled), kDefaultBaseline);
    ASSERT_EQ(base.size(), other.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
        expect_rel(other[i].latency_relative_to_baseline, base[i].latency_relative_to_baseline, 1e-12);
        expect_rel(other[i].bytes_read_relative_to_baseline, base[i].bytes_read_relative_to_baseline, 1e-12);
        expect_rel(other[i].server_cpu_relative_to_baseline, base[i].server_cpu_relative_to_baseline, 1e-12);
    }
    const auto& self = *std::find_if(base.begin(), base.end(),
                                     [](const auto& n) { return n.scenario_id == kDefaultBaseline; });
    EXPECT_DOUBLE_EQ(self.latency_relative_to_baseline, 1.0);
}

TEST(AnalyticsProperty, RetainedTimesMultiplierIsOne) {
    for (const auto& c : report().capacity)
        EXPECT_NEAR(c.capacity_retained_vs_baseline * c.infrastructure_multiplier_needed, 1.0, 1e-12);
    for (std::size_t i = 1; i < report().capacity.size(); ++i)
        EXPECT_GE(report().capacity[i - 1].handshakes_per_core_second, report().capacity[i].handshakes_per_core_second);
}

TEST(AnalyticsProperty, RegimeThresholds) {
    EXPECT_EQ(regime_label(10.0), RegimeLabel::Balanced);
    EXPECT_EQ(regime_label(10.0001), RegimeLabel::OverwhelminglyServerBound);
    EXPECT_EQ(regime_label(0.5), RegimeLabel::Balanced);
    EXPECT_EQ(regime_label(0.4999), RegimeLabel::ClientSkewed);
    Config c;
    c.regime_server_bound_above = 2;
    EXPECT_EQ(regime_label(3, c), RegimeLabel::OverwhelminglyServerBound);
}

TEST(AnalyticsProperty, PlausibilityThresholdsAreMonotone) {
    int last = 0;
    for (double x = 0.5; x < 5000; x *= 1.07) {
        const int ord = static_cast<int>(plausibility_label(x));
        EXPECT_GE(ord, last);
        last = ord;
    }
    EXPECT_EQ(plausibility_label(1.5), Plausibility::Reasonable);
    EXPECT_EQ(plausibility_label(20.0), Plausibility::PenalizedButPlausible);
    EXPECT_EQ(plausibility_label(200.0), Plausibility::OperationallyProblematic);
    EXPECT_EQ(plausibility_label(200.1), Plausibility::Unsuitable);
}

TEST(AnalyticsProperty, CounterexamplesAreGenuineInversions) {
    const auto all = counterexamples(rows(), Metric::BytesRead, CounterexampleRanking::BytesDiff, 0);
    ASSERT_FALSE(all.empty());
    for (std::size_t i = 0; i < all.size(); ++i) {
        EXPECT_GT(all[i].more_bytes, all[i].fewer_bytes);
        EXPECT_GT(all[i].latency_ratio, 1.0);
        if (i) EXPECT_GE(all[i - 1].bytes_diff, all[i].bytes_diff);
    }
}

TEST(AnalyticsProperty, MissingMetricRowsAreSkipped) {
    // The fixture lacks chain_bytes_unique for most rows.
    const auto c = correlate(rows(), Subset::All, Metric::ChainBytesUnique);
    EXPECT_LT(c.n, 17u);
    EXPECT_GE(c.n, 3u);
}

// ---- config and errors ----

TEST(AnalyticsConfig, ParsesKeysAndComments) {
    const auto c = parse_config(R"(# thresholds
baseline_id = x25519mlkem768__ml_root__ml_leaf
price_per_cpu_hour = 0.08   # doubled
regime.server_bound_above = 12
regime.client_skewed_below=0.4
plausibility.reasonable_max = 2
counterexample.ranking = bytes_diff
counterexample.top_k = 3
service_class.tiny = 1000
)");
    EXPECT_EQ(c.baseline_id, "x25519mlkem768__ml_root__ml_leaf");
    EXPECT_DOUBLE_EQ(c.price_per_cpu_hour, 0.08);
    EXPECT_DOUBLE_EQ(c.regime_server_bound_above, 12);
    EXPECT_DOUBLE_EQ(c.regime_client_skewed_below, 0.4);
    EXPECT_DOUBLE_EQ(c.plausibility_reasonable_max, 2);
    EXPECT_EQ(c.counterexample_ranking, CounterexampleRanking::BytesDiff);
    EXPECT_EQ(c.counterexample_top_k, 3u);
    ASSERT_EQ(c.service_classes.size(), 1u);
    EXPECT_EQ(c.service_classes[0].name, "tiny");
}

TEST(AnalyticsConfig, RejectsBadInput) {
    EXPECT_THROW(parse_config("nonsense = 1"), SchemaError);
    EXPECT_THROW(parse_config("price_per_cpu_hour = cheap"), SchemaError);
    EXPECT_THROW(parse_config("no equals sign"), SchemaError);
    EXPECT_THROW(parse_config("counterexample.ranking = random"), SchemaError);
}

TEST(AnalyticsConfig, ShippedConfigMatchesDefaults) {
    const auto c = load_config(std::filesystem::path(PQCHAIN_SOURCE_DIR) / "data" / "analytics.conf");
    const Config d;
    EXPECT_EQ(c.baseline_id, d.baseline_id);
    EXPECT_EQ(c.price_per_cpu_hour, d.price_per_cpu_hour);
    EXPECT_EQ(c.regime_server_bound_above, d.regime_server_bound_above);
    EXPECT_EQ(c.plausibility_problematic_max, d.plausibility_problematic_max);
    ASSERT_EQ(c.service_classes.size(), d.service_classes.size());
    for (std::size_t i = 0; i < d.service_classes.size(); ++i) {
        EXPECT_EQ(c.service_classes[i].name, d.service_classes[i].name);
        EXPECT_EQ(c.service_classes[i].daily_handshakes, d.service_classes[i].daily_handshakes);
    }
}

TEST(AnalyticsErrors, MissingBaseline) {
    Config c;
    c.baseline_id = "x25519mlkem768__nope";
    EXPECT_THROW(analyze(paper_fixture(), c), SchemaError);
}

TEST(AnalyticsErrors, DuplicateAndUnknownRows) {
    auto dup = paper_fixture();
    dup.push_back(dup.front());
    EXPECT_THROW(prepare(dup), SchemaError);
    auto unknown = paper_fixture();
    unknown.front().scenario_id = "garbage";
    EXPECT_THROW(prepare(unknown), SchemaError);
}

TEST(AnalyticsSubset, PartialInputSkipsMissingPairs) {
    std::vector<bench::RunAggregate> part;
    for (const auto& a : paper_fixture())
        if (a.kex_mode == "hybrid") part.push_back(a);
    const auto rep = analyze(part, Config{});
    EXPECT_EQ(rep.campaign_a.size(), 1u);
    EXPECT_EQ(rep.kex.size(), 0u);
    EXPECT_FALSE(rep.warnings.empty());
}

// ---- report output ----

TEST(Report, ByteStableAndComplete) {
    testsupport::TempDir a("rep-a"), b("rep-b");
    write_report(report(), rows(), a.path);
    write_report(analyze(paper_fixture(), Config{}), rows(), b.path);
    std::size_t files = 0;
    for (const auto& e : std::filesystem::directory_iterator(a.path)) {
        ++files;
        EXPECT_EQ(testsupport::slurp(e.path()), testsupport::slurp(b.path / e.path().filename()))
            << e.path().filename();
    }
    EXPECT_EQ(files, 15u);
    const auto corr = testsupport::slurp(a.path / "correlations.csv");
    EXPECT_NE(corr.find("0.7493"), std::string::npos);
    EXPECT_NE(corr.find("0.8503"), std::string::npos);
}

TEST(Report, PlotsOnlyMentionPresentScenarios) {
    std::vector<bench::RunAggregate> part;
    for (const auto& a : paper_fixture())
        if (a.depth == 3) part.push_back(a);
    testsupport::TempDir dir("rep-part");
    write_report(analyze(part, Config{}), prepare(part), dir.path);
    const auto svg = testsupport::slurp(dir.path / "latency_by_scenario.svg");
    for (const auto& a : paper_fixture()) {
        const bool present = a.depth == 3;
        EXPECT_EQ(svg.find(a.scenario_id + "<") != std::string::npos, present) << a.scenario_id;
    }
}

TEST(Report, MarkdownSummary) {
    const auto md = render_markdown(report());
    EXPECT_NE(md.find("# pqchainlab report"), std::string::npos);
    EXPECT_NE(md.find("Unsuitable for interactive TLS front-end"), std::string::npos);
}
