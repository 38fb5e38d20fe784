#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pqchain/bytes.hpp"
#include "pqchain/pki.hpp"
#include "pqchain/scenario.hpp"

namespace pqchain::bench {

struct HandshakeSample {
    std::uint64_t run_index = 0;
    double elapsed_ms = 0;
    std::uint64_t bytes_read = 0;
    std::uint64_t bytes_written = 0;
    std::uint64_t chain_len_unique = 0;
    std::uint64_t chain_bytes_unique = 0;
    std::uint64_t served_chain_der_bytes = 0;
    double client_cpu_ms = 0;
    double server_cpu_ms = 0;

    bool operator==(const HandshakeSample&) const = default;
};

/// One master-summary row. Numeric fields are NaN when unknown, which only
/// happens for rows loaded from a partial table such as the reference fixture.
struct RunAggregate {
    std::string scenario_id;
    std::string kex_mode;
    int depth = 0;
    std::string hierarchy;
    double n_runs = 0;
    double elapsed_mean_ms = 0;
    double elapsed_p95_ms = 0;
    double bytes_read_mean = 0;
    double bytes_written_mean = 0;
    double chain_len_unique = 0;
    double chain_bytes_unique = 0;
    double served_chain_der_bytes = 0;
    double client_task_clock_per_run_ms = 0;
    double server_task_clock_per_run_ms = 0;
    double client_taskclock_over_elapsed = 0;
    double server_taskclock_over_elapsed = 0;
    double server_client_taskclock_ratio = 0;

    bool operator==(const RunAggregate&) const;
};

struct BenchConfig {
    /// Unset means the scenario's own run counts.
    std::optional<int> runs;
    std::optional<int> warmup_runs;
    std::uint16_t port = 0;
    std::uint16_t control_port = 0;
    pki::ServedChainPolicy policy = pki::ServedChainPolicy::MIRROR_PAPER;
    /// Seeds client and server ephemerals; unset uses the OS RNG.
    std::optional<Bytes> deterministic_seed;
    /// Validation time for the client; unset uses the wall clock.
    std::optional<std::uint64_t> now;
};

/// Called after each measured run with (done, total).
using ProgressFn = std::function<void(int, int)>;

/// Runs warmups, then cfg.runs measured handshakes over fresh connections.
/// Any failed handshake aborts with a runtime_error naming the scenario.
std::vector<HandshakeSample> run_scenario(const Scenario& s, const pki::HierarchyMaterial& h, const BenchConfig& cfg,
                                          const ProgressFn& progress = {});

/// Nearest-rank percentile, p in (0, 100].
double nearest_rank(std::vector<double> values, double p);

RunAggregate aggregate(const Scenario& s, const std::vector<HandshakeSample>& samples);

/// Recomputes the three ratio columns from their components.
void derive_ratios(RunAggregate& a);

std::string sample_to_json(const HandshakeSample& s);
HandshakeSample sample_from_json(std::string_view line);

void write_samples(const std::filesystem::path& path, const std::vector<HandshakeSample>& samples);
std::vector<HandshakeSample> read_samples(const std::filesystem::path& path);

/// Master-summary CSV columns, in file order.
const std::vector<std::string>& summary_columns();

void write_summary_csv(std::ostream& out, const std::vector<RunAggregate>& rows);
std::vector<RunAggregate> read_summary_csv(std::istream& in);

/// Writes results/<scenario_id>.jsonl for each entry and results/master_summary.csv.
void write_results(const std::filesystem::path& results_dir, const std::vector<RunAggregate>& aggregates,
                   const std::map<std::string, std::vector<HandshakeSample>>& samples);

std::vector<RunAggregate> load_summary(const std::filesystem::path& csv_path);

}  // namespace pqchain::bench
