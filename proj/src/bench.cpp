#include "pqchain/bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <memory>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "pqchain/crypto/rng.hpp"
#include "pqchain/errors.hpp"
#include "pqchain/handshake/transport.hpp"

namespace pqchain::bench {
namespace {

// CPU time may not exceed wall time on a sequential handshake; the slack
// absorbs clock granularity.
constexpr double kCpuSlack = 1.05;

bool same_number(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

std::string format_double(double v) {
    if (std::isnan(v)) return "";
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

double parse_double(const std::string& cell, const std::string& column) {
    if (cell.empty()) return std::nan("");
    double v = 0;
    const auto r = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (r.ec != std::errc() || r.ptr != cell.data() + cell.size())
        throw SchemaError("column " + column + ": not a number: '" + cell + "'");
    return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

bool RunAggregate::operator==(const RunAggregate& o) const {
    return scenario_id == o.scenario_id && kex_mode == o.kex_mode && depth == o.depth && hierarchy == o.hierarchy &&
           same_number(n_runs, o.n_runs) && same_number(elapsed_mean_ms, o.elapsed_mean_ms) &&
           same_number(elapsed_p95_ms, o.elapsed_p95_ms) && same_number(bytes_read_mean, o.bytes_read_mean) &&
           same_number(bytes_written_mean, o.bytes_written_mean) &&
           same_number(chain_len_unique, o.chain_len_unique) &&
           same_number(chain_bytes_unique, o.chain_bytes_unique) &&
           same_number(served_chain_der_bytes, o.served_chain_der_bytes) &&
           same_number(client_task_clock_per_run_ms, o.client_task_clock_per_run_ms) &&
           same_number(server_task_clock_per_run_ms, o.server_task_clock_per_run_ms) &&
           same_number(client_taskclock_over_elapsed, o.client_taskclock_over_elapsed) &&
           same_number(server_taskclock_over_elapsed, o.server_taskclock_over_elapsed) &&
           same_number(server_client_taskclock_ratio, o.server_client_taskclock_ratio);
}

std::vector<HandshakeSample> run_scenario(const Scenario& s, const pki::HierarchyMaterial& h, const BenchConfig& cfg,
                                          const ProgressFn& progress) {
    const int runs = cfg.runs.value_or(s.runs);
    const int warmup = cfg.warmup_runs.value_or(s.warmup_runs);
    if (runs < 1) throw std::invalid_argument("runs must be at least 1");
    if (warmup < 0) throw std::invalid_argument("warmup runs must be nonnegative");

    const std::uint64_t now = cfg.now.value_or(static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
            .count()));

    handshake::ServerOptions opts;
    opts.port = cfg.port;
    opts.control_port = cfg.control_port;
    std::unique_ptr<crypto::Rng> client_rng;
    if (cfg.deterministic_seed) {
        Bytes server_seed = *cfg.deterministic_seed;
        append(server_seed, as_bytes(std::string_view("server")));
        opts.deterministic_seed = server_seed;
        Bytes client_seed = *cfg.deterministic_seed;
        append(client_seed, as_bytes(std::string_view("client")));
        client_rng = std::make_unique<crypto::SeededRng>(client_seed);
    } else {
        client_rng = std::make_unique<crypto::OsRng>();
    }

    auto identity = std::make_shared<const handshake::ServerIdentity>(pki::served_chain(h, cfg.policy), h.leaf.key);
    handshake::HandshakeServer server(identity, opts);
    handshake::ControlClient control(server.control_port());

    const auto trust = pki::client_trust_store(h, cfg.policy);
    std::vector<HandshakeSample> samples;
    samples.reserve(static_cast<std::size_t>(runs));
    std::uint64_t expected_index = 0;
    for (int i = 0; i < warmup + runs; ++i) {
        handshake::ClientOutcome out;
        try {
            out = handshake::run_client(server.port(), s.kex, trust, now, *client_rng);
        } catch (const TransportError& e) {
            throw TransportError(s.scenario_id + ": run " + std::to_string(i) + ": " + e.what());
        } catch (const std::exception& e) {
            throw CryptoError(s.scenario_id + ": run " + std::to_string(i) + ": handshake failed: " + e.what());
        }
        const handshake::ServerRecord rec = control.next();
        if (rec.connection_index != expected_index)
            throw std::logic_error(s.scenario_id + ": control channel out of sequence");
        ++expected_index;
        if (!rec.ok) throw CryptoError(s.scenario_id + ": run " + std::to_string(i) + ": server rejected: " + rec.error);
        if (out.client_cpu_ms > out.elapsed_ms * kCpuSlack)
            throw std::logic_error(s.scenario_id + ": client CPU time exceeds elapsed time");
        if (i < warmup) continue;

        HandshakeSample smp;
        smp.run_index = samples.size();
        smp.elapsed_ms = out.elapsed_ms;
        smp.bytes_read = out.bytes_read;
        smp.bytes_written = out.bytes_written;
        smp.chain_len_unique = out.result.observation.chain_len_unique;
        smp.chain_bytes_unique = out.result.observation.chain_bytes_unique;
        smp.served_chain_der_bytes = out.result.observation.served_chain_der_bytes;
        smp.client_cpu_ms = out.client_cpu_ms;
        smp.server_cpu_ms = rec.server_cpu_ms;
        samples.push_back(smp);
        if (progress) progress(static_cast<int>(samples.size()), runs);
    }
    return samples;
}

double nearest_rank(std::vector<double> values, double p) {
    if (values.empty()) throw std::invalid_argument("nearest_rank of empty set");
    std::sort(values.begin(), values.end());
    const auto n = static_cast<double>(values.size());
    auto rank = static_cast<std::size_t>(std::ceil(p * n / 100.0));
    rank = std::clamp<std::size_t>(rank, 1, values.size());
    return values[rank - 1];
}

void derive_ratios(RunAggregate& a) {
    a.client_taskclock_over_elapsed = a.client_task_clock_per_run_ms / a.elapsed_mean_ms;
    a.server_taskclock_over_elapsed = a.server_task_clock_per_run_ms / a.elapsed_mean_ms;
    a.server_client_taskclock_ratio = a.server_task_clock_per_run_ms / a.client_task_clock_per_run_ms;
}

RunAggregate aggregate(const Scenario& s, const std::vector<HandshakeSample>& samples) {
    if (samples.empty()) throw std::invalid_argument("aggregate of empty sample list");
    const auto n = static_cast<double>(samples.size());
    auto mean = [&](auto field) {
        double sum = 0;
        for (const auto& x : samples) sum += static_cast<double>(field(x));
        return sum / n;
    };
    std::vector<double> elapsed;
    elapsed.reserve(samples.size());
    for (const auto& x : samples) elapsed.push_back(x.elapsed_ms);

    RunAggregate a;
    a.scenario_id = s.scenario_id;
    a.kex_mode = std::string(kex_mode_name(s.kex));
    a.depth = s.depth();
    a.hierarchy = s.hierarchy_label();
    a.n_runs = n;
    a.elapsed_mean_ms = mean([](const auto& x) { return x.elapsed_ms; });
    a.elapsed_p95_ms = nearest_rank(elapsed, 95);
    a.bytes_read_mean = mean([](const auto& x) { return x.bytes_read; });
    a.bytes_written_mean = mean([](const auto& x) { return x.bytes_written; });
    a.chain_len_unique = mean([](const auto& x) { return x.chain_len_unique; });
    a.chain_bytes_unique = mean([](const auto& x) { return x.chain_bytes_unique; });
    a.served_chain_der_bytes = mean([](const auto& x) { return x.served_chain_der_bytes; });
    a.client_task_clock_per_run_ms = mean([](const auto& x) { return x.client_cpu_ms; });
    a.server_task_clock_per_run_ms = mean([](const auto& x) { return x.server_cpu_ms; });
    derive_ratios(a);
    return a;
}

std::string sample_to_json(const HandshakeSample& s) {
    const nlohmann::ordered_json j{{"run_index", s.run_index},
                                   {"elapsed_ms", s.elapsed_ms},
                                   {"bytes_read", s.bytes_read},
                                   {"bytes_written", s.bytes_written},
                                   {"chain_len_unique", s.chain_len_unique},
                                   {"chain_bytes_unique", s.chain_bytes_unique},
                                   {"served_chain_der_bytes", s.served_chain_der_bytes},
                                   {"client_cpu_ms", s.client_cpu_ms},
                                   {"server_cpu_ms", s.server_cpu_ms}};
    return j.dump();
}

HandshakeSample sample_from_json(std::string_view line) {
    try {
        const auto j = nlohmann::json::parse(line);
        HandshakeSample s;
        s.run_index = j.at("run_index").get<std::uint64_t>();
        s.elapsed_ms = j.at("elapsed_ms").get<double>();
        s.bytes_read = j.at("bytes_read").get<std::uint64_t>();
        s.bytes_written = j.at("bytes_written").get<std::uint64_t>();
        s.chain_len_unique = j.at("chain_len_unique").get<std::uint64_t>();
        s.chain_bytes_unique = j.at("chain_bytes_unique").get<std::uint64_t>();
        s.served_chain_der_bytes = j.at("served_chain_der_bytes").get<std::uint64_t>();
        s.client_cpu_ms = j.at("client_cpu_ms").get<double>();
        s.server_cpu_ms = j.at("server_cpu_ms").get<double>();
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("sample: ") + e.what());
    }
}

void write_samples(const std::filesystem::path& path, const std::vector<HandshakeSample>& samples) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    for (const auto& s : samples) out << sample_to_json(s) << '\n';
}

std::vector<HandshakeSample> read_samples(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::vector<HandshakeSample> out;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) out.push_back(sample_from_json(line));
    return out;
}

const std::vector<std::string>& summary_columns() {
    static const std::vector<std::string> cols{
        "scenario_id",        "kex_mode",           "depth",
        "hierarchy",          "n_runs",             "mean_ms",
        "p95_ms",             "bytes_read",         "bytes_written",
        "chain_len_unique",   "chain_bytes_unique", "served_chain_der_bytes",
        "client_task_ms",     "server_task_ms",     "client_over_elapsed",
        "server_over_elapsed", "srv_cli_ratio"};
    return cols;
}

namespace {

using NumField = double RunAggregate::*;

const std::vector<std::pair<std::string, NumField>>& numeric_fields() {
    static const std::vector<std::pair<std::string, NumField>> f{
        {"n_runs", &RunAggregate::n_runs},
        {"mean_ms", &RunAggregate::elapsed_mean_ms},
        {"p95_ms", &RunAggregate::elapsed_p95_ms},
        {"bytes_read", &RunAggregate::bytes_read_mean},
        {"bytes_written", &RunAggregate::bytes_written_mean},
        {"chain_len_unique", &RunAggregate::chain_len_unique},
        {"chain_bytes_unique", &RunAggregate::chain_bytes_unique},
        {"served_chain_der_bytes", &RunAggregate::served_chain_der_bytes},
        {"client_task_ms", &RunAggregate::client_task_clock_per_run_ms},
        {"server_task_ms", &RunAggregate::server_task_clock_per_run_ms},
        {"client_over_elapsed", &RunAggregate::client_taskclock_over_elapsed},
        {"server_over_elapsed", &RunAggregate::server_taskclock_over_elapsed},
        {"srv_cli_ratio", &RunAggregate::server_client_taskclock_ratio},
    };
    return f;
}

}  // namespace

void write_summary_csv(std::ostream& out, const std::vector<RunAggregate>& rows) {
    const auto& cols = summary_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << '\n';
    for (const auto& r : rows) {
        out << r.scenario_id << ',' << r.kex_mode << ',' << r.depth << ',' << r.hierarchy;
        for (const auto& [name, field] : numeric_fields()) out << ',' << format_double(r.*field);
        out << '\n';
    }
}

std::vector<RunAggregate> read_summary_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("summary CSV is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_csv_line(line);
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < header.size(); ++i) index[header[i]] = i;
    for (const auto& c : summary_columns())
        if (!index.count(c)) throw SchemaError("summary CSV lacks column " + c);

    std::vector<RunAggregate> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw SchemaError("summary CSV line " + std::to_string(line_no) + ": expected " +
                              std::to_string(header.size()) + " cells, got " + std::to_string(cells.size()));
        auto cell = [&](const std::string& c) { return cells[index.at(c)]; };
        RunAggregate r;
        r.scenario_id = cell("scenario_id");
        r.kex_mode = cell("kex_mode");
        if (!kex_from_mode_name(r.kex_mode)) throw SchemaError("unknown kex_mode '" + r.kex_mode + "'");
        const double depth = parse_double(cell("depth"), "depth");
        if (depth != 2 && depth != 3) throw SchemaError(r.scenario_id + ": depth must be 2 or 3");
        r.depth = static_cast<int>(depth);
        r.hierarchy = cell("hierarchy");
        for (const auto& [name, field] : numeric_fields()) r.*field = parse_double(cell(name), name);
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_results(const std::filesystem::path& results_dir, const std::vector<RunAggregate>& aggregates,
                   const std::map<std::string, std::vector<HandshakeSample>>& samples) {
    std::filesystem::create_directories(results_dir);
    for (const auto& [id, list] : samples) write_samples(results_dir / (id + ".jsonl"), list);
    std::ofstream out(results_dir / "master_summary.csv", std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + (results_dir / "master_summary.csv").string());
    write_summary_csv(out, aggregates);
}

std::vector<RunAggregate> load_summary(const std::filesystem::path& csv_path) {
    std::ifstream in(csv_path);
    if (!in) throw SchemaError("cannot read " + csv_path.string());
    return read_summary_csv(in);
}

}  // namespace pqchain::bench
