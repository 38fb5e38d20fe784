#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pqchain/bench.hpp"
#include "pqchain/scenario.hpp"

namespace pqchain::analytics {

inline constexpr std::string_view kDefaultBaseline = "x25519mlkem768__ml_root__ml_int__ml_leaf";

struct ServiceClass {
    std::string name;
    double daily_handshakes = 0;
};

enum class CounterexampleRanking {
    WeightedLogRatio,  // bytes_diff * ln(latency ratio)
    BytesDiff,
};

struct Config {
    std::string baseline_id{kDefaultBaseline};
    double price_per_cpu_hour = 0.04;
    double regime_server_bound_above = 10.0;
    double regime_client_skewed_below = 0.5;
    double plausibility_reasonable_max = 1.5;
    double plausibility_penalized_max = 20.0;
    double plausibility_problematic_max = 200.0;
    std::vector<ServiceClass> service_classes{
        {"small_internal", 1e5}, {"medium_api", 1e7}, {"high_volume_frontend", 1e8}};
    CounterexampleRanking counterexample_ranking = CounterexampleRanking::WeightedLogRatio;
    std::size_t counterexample_top_k = 5;
};

/// key = value lines; '#' starts a comment. service_class.<name> = <daily handshakes>.
Config parse_config(std::string_view text);
Config load_config(const std::filesystem::path& path);

/// A summary row with its parsed placement.
struct Row {
    bench::RunAggregate agg;
    KexMode kex;
    Placement placement;
    PlacementClass flags;
};

/// Parses placements from scenario ids and fills missing ratio columns.
std::vector<Row> prepare(const std::vector<bench::RunAggregate>& aggregates);

/// The published master summary table, shipped with the library.
std::string_view paper_fixture_csv();
std::vector<bench::RunAggregate> paper_fixture();

const Row& find_row(const std::vector<Row>& rows, std::string_view id);
const Row* try_find_row(const std::vector<Row>& rows, std::string_view id);

struct NormalizedRow {
    std::string scenario_id;
    double latency_relative_to_baseline = 0;
    double bytes_read_relative_to_baseline = 0;
    double server_cpu_relative_to_baseline = 0;
};

NormalizedRow normalize_row(const Row& r, const Row& baseline);
std::vector<NormalizedRow> normalize_to_baseline(const std::vector<Row>& rows, std::string_view baseline_id);

/// "no_slh", "root", "leaf", "root_and_leaf", ...
std::string slh_position_class(const Placement& p);

struct CampaignAPair {
    KexMode kex;
    std::string ml_id;
    std::string slh_id;
    double ml_elapsed_ms, slh_elapsed_ms, latency_ratio;
    double ml_bytes_read, slh_bytes_read, bytes_read_ratio;
    double ml_server_ms, slh_server_ms, server_ratio;
    double ml_client_ms, slh_client_ms, client_ratio;
};

/// One pair per kex mode that has both uniform depth-2 legacy rows.
std::vector<CampaignAPair> campaignA_pairs(const std::vector<Row>& rows);

struct StrategyRow {
    std::string scenario_id;
    std::string slh_position;
    double elapsed_mean_ms, bytes_read_mean, server_task_ms;
    NormalizedRow normalized;
};

/// The depth-3 hybrid rows, normalized to the baseline.
std::vector<StrategyRow> strategy_matrix(const std::vector<Row>& rows, std::string_view baseline_id);

enum class PlacementClassName { AllMl, RootSlhLeafNotSlh, IntermediateSlhAny, LeafSlh };
std::string_view placement_class_name(PlacementClassName c);

struct PlacementStats {
    PlacementClassName cls;
    std::size_t n = 0;
    double mean_elapsed_ms, median_elapsed_ms, min_elapsed_ms, max_elapsed_ms;
    double mean_latency_vs_baseline, median_latency_vs_baseline;
    double mean_bytes_vs_baseline, mean_server_cpu_vs_baseline;
    double mean_server_over_elapsed, mean_client_over_elapsed;
};

/// Classes with no members are omitted.
std::vector<PlacementStats> placement_summary(const std::vector<Row>& rows, std::string_view baseline_id);

struct PairDelta {
    std::string label;
    std::string from_id;  // depth 2, or the "from" kex mode
    std::string to_id;
    double from_elapsed_ms, to_elapsed_ms, delta_elapsed_ms, latency_ratio;
    double from_bytes_read, to_bytes_read, delta_bytes_read, bytes_read_ratio;
    double delta_chain_bytes_unique;
    double from_server_ms, to_server_ms, delta_server_ms, server_ratio;
};

/// Six fixed depth-2 -> depth-3 pairs; pairs with a missing member are skipped.
std::vector<PairDelta> depth_pairs(const std::vector<Row>& rows, std::vector<std::string>* warnings = nullptr);

struct KexPair {
    std::string comparison;  // "classical_vs_hybrid" / "hybrid_vs_pure_pqc"
    std::string family_label;
    KexMode from_kex, to_kex;
    SigFamily leaf_family;
    int depth;
    PairDelta values;
};

/// Five fixed comparisons on comparable chains.
std::vector<KexPair> kex_pairs(const std::vector<Row>& rows, std::vector<std::string>* warnings = nullptr);

enum class Subset { All, NonLeafSlh, LeafSlhOnly };
std::string_view subset_name(Subset s);

enum class Metric { BytesRead, ChainBytesUnique };
std::string_view metric_name(Metric m);
double metric_value(const Row& r, Metric m);

double pearson(const std::vector<double>& x, const std::vector<double>& y);
/// Average ranks, 1-based; ties share the mean of their positions.
std::vector<double> average_ranks(const std::vector<double>& v);
double spearman(const std::vector<double>& x, const std::vector<double>& y);

struct Correlation {
    Subset subset;
    Metric metric;
    std::size_t n;
    double pearson_r;
    double spearman_rho;
};

/// Rows lacking the metric are left out. Throws when fewer than 3 remain
/// or either variable has no variance.
Correlation correlate(const std::vector<Row>& rows, Subset subset, Metric metric);

struct Counterexample {
    std::size_t rank;
    Metric metric;
    std::string more_bytes_id;
    std::string fewer_bytes_id;
    double more_bytes, fewer_bytes, bytes_diff;
    double lower_latency_ms, higher_latency_ms, latency_ratio;
    double score;
};

/// Pairs where the higher-metric row is faster. top_k == 0 keeps all.
std::vector<Counterexample> counterexamples(const std::vector<Row>& rows, Metric metric,
                                            CounterexampleRanking ranking, std::size_t top_k);

enum class RegimeLabel { Balanced, ClientSkewed, OverwhelminglyServerBound };
std::string_view regime_name(RegimeLabel l);
RegimeLabel regime_label(double server_client_ratio, const Config& cfg = {});

enum class PerfGroup { AllMl, RootSlhLeafMl, LeafSlh };
std::string_view perf_group_name(PerfGroup g);
PerfGroup perf_group(const Placement& p);

struct CapacityRow {
    std::string scenario_id;
    std::string kex_mode;
    int depth;
    double handshakes_per_core_second;
    double handshakes_per_vcpu_hour;
    double capacity_retained_vs_baseline;
    double infrastructure_multiplier_needed;
    PerfGroup group;
};

/// Sorted by capacity, highest first.
std::vector<CapacityRow> capacity_model(const std::vector<Row>& rows, std::string_view baseline_id);

struct EconomicRow {
    std::string scenario_id;
    PerfGroup group;
    double server_cpu_seconds_per_handshake;
    double cpu_hours_per_million;
    double cost_per_million;
    double extra_cost_per_million;
    double cost_multiplier_vs_baseline;
};

std::vector<EconomicRow> economic_model(const std::vector<Row>& rows, const Config& cfg);

struct ServiceClassSummary {
    std::string service_class;
    PerfGroup group;
    std::size_t n;
    double mean_daily, median_daily;
    double mean_extra_daily, median_extra_daily;
    double mean_monthly, median_monthly;
    double mean_extra_monthly, median_extra_monthly;
    double mean_annual, mean_extra_annual;
};

std::vector<ServiceClassSummary> service_class_summary(const std::vector<EconomicRow>& econ, const Config& cfg);

enum class Plausibility { Reasonable, PenalizedButPlausible, OperationallyProblematic, Unsuitable };
std::string_view plausibility_name(Plausibility p);
Plausibility plausibility_label(double latency_multiplier, const Config& cfg = {});

struct PlausibilityRow {
    int rank;
    std::string scenario_id;
    std::string hierarchy;
    std::string slh_position;
    double latency_relative_to_baseline;
    double elapsed_mean_ms;
    double server_task_ms;
    Plausibility label;
};

/// Rank is the label's ordinal (1..4), so every row sharing a label shares a rank.
std::vector<PlausibilityRow> plausibility_rank(const std::vector<StrategyRow>& strategy,
                                               const std::vector<Row>& rows, const Config& cfg = {});

struct Report {
    std::vector<CampaignAPair> campaign_a;
    std::vector<StrategyRow> strategy;
    std::vector<PlacementStats> placement;
    std::vector<PairDelta> depth;
    std::vector<KexPair> kex;
    std::vector<Correlation> correlations;
    std::vector<Counterexample> counterexamples;
    std::vector<std::pair<std::string, RegimeLabel>> regimes;
    std::vector<CapacityRow> capacity;
    std::vector<EconomicRow> economics;
    std::vector<ServiceClassSummary> service_classes;
    std::vector<PlausibilityRow> plausibility;
    std::vector<std::string> warnings;
};

/// Runs every analysis. Throws SchemaError when the baseline row is missing.
Report analyze(const std::vector<bench::RunAggregate>& aggregates, const Config& cfg);

/// Writes one CSV per table plus SVG plots into dir.
void write_report(const Report& report, const std::vector<Row>& rows, const std::filesystem::path& dir);

/// Short human-readable summary of the main tables.
std::string render_markdown(const Report& report);

}  // namespace pqchain::analytics
