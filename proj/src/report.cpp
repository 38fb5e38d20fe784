#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "pqchain/analytics.hpp"

namespace pqchain::analytics {
namespace {

std::string f4(double v) {
    if (std::isnan(v)) return "";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

class Csv {
public:
    Csv(const std::filesystem::path& path, std::initializer_list<std::string_view> header) : out_(path) {
        if (!out_) throw std::runtime_error("cannot write " + path.string());
        bool first = true;
        for (auto h : header) {
            out_ << (first ? "" : ",") << h;
            first = false;
        }
        out_ << '\n';
    }

    template <typename... Cells>
    void row(const Cells&... cells) {
        bool first = true;
        ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
        out_ << '\n';
    }

private:
    static std::string cell(double v) { return f4(v); }
    static std::string cell(std::size_t v) { return std::to_string(v); }
    static std::string cell(int v) { return std::to_string(v); }
    static std::string cell(std::string_view v) { return std::string(v); }
    static std::string cell(const std::string& v) { return v; }
    static std::string cell(const char* v) { return v; }

    std::ofstream out_;
};

std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

struct LogAxis {
    double lo, hi;  // decades

    static LogAxis covering(const std::vector<double>& v) {
        double mn = INFINITY, mx = -INFINITY;
        for (double x : v) {
            if (!(x > 0)) continue;
            mn = std::min(mn, x);
            mx = std::max(mx, x);
        }
        if (!std::isfinite(mn)) return {0, 1};
        LogAxis a{std::floor(std::log10(mn)), std::ceil(std::log10(mx))};
        if (a.hi <= a.lo) a.hi = a.lo + 1;
        return a;
    }
    double frac(double x) const { return (std::log10(x) - lo) / (hi - lo); }
};

// Horizontal log-scale bar chart, one bar per label.
void bar_chart(const std::filesystem::path& path, const std::string& title, const std::string& unit,
               const std::vector<std::pair<std::string, double>>& bars) {
    const int left = 330, width = 900, bar_h = 22, top = 50;
    const int plot_w = width - left - 30;
    const int height = top + static_cast<int>(bars.size()) * bar_h + 50;
    std::vector<double> values;
    for (const auto& b : bars) values.push_back(b.second);
    const LogAxis ax = LogAxis::covering(values);

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    out << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << xml_escape(title)
        << "</text>\n";
    for (double d = ax.lo; d <= ax.hi; d += 1) {
        const double x = left + plot_w * (d - ax.lo) / (ax.hi - ax.lo);
        out << "<line x1=\"" << x << "\" y1=\"" << top - 5 << "\" x2=\"" << x << "\" y2=\"" << height - 40
            << "\" stroke=\"#ddd\"/>\n";
        out << "<text x=\"" << x << "\" y=\"" << height - 25 << "\" text-anchor=\"middle\">1e" << d << "</text>\n";
    }
    out << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 8 << "\" text-anchor=\"middle\">"
        << xml_escape(unit) << " (log scale)</text>\n";
    for (std::size_t i = 0; i < bars.size(); ++i) {
        const double y = top + static_cast<double>(i) * bar_h;
        const double v = bars[i].second;
        const double w = v > 0 ? std::max(1.0, plot_w * ax.frac(v)) : 0;
        out << "<text x=\"" << left - 6 << "\" y=\"" << y + bar_h * 0.65 << "\" text-anchor=\"end\">"
            << xml_escape(bars[i].first) << "</text>\n";
        out << "<rect x=\"" << left << "\" y=\"" << y + 3 << "\" width=\"" << w << "\" height=\"" << bar_h - 6
            << "\" fill=\"#4a7ab5\"><title>" << xml_escape(bars[i].first) << ": " << f4(v) << "</title></rect>\n";
    }
    out << "</svg>\n";
}

void scatter(const std::filesystem::path& path, const std::string& title, const std::string& x_label,
             const std::string& y_label, const std::vector<std::tuple<std::string, double, double>>& points) {
    const int size = 620, margin = 70;
    const int plot = size - 2 * margin;
    std::vector<double> xs, ys;
    for (const auto& [n, x, y] : points) {
        xs.push_back(x);
        ys.push_back(y);
    }
    const LogAxis ax = LogAxis::covering(xs);
    const LogAxis ay = LogAxis::covering(ys);

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size
        << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    out << "<text x=\"" << size / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" << xml_escape(title)
        << "</text>\n";
    out << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << plot << "\" height=\"" << plot
        << "\" fill=\"none\" stroke=\"#999\"/>\n";
    for (double d = ax.lo; d <= ax.hi; d += 1) {
        const double x = margin + plot * (d - ax.lo) / (ax.hi - ax.lo);
        out << "<text x=\"" << x << "\" y=\"" << margin + plot + 16 << "\" text-anchor=\"middle\">1e" << d
            << "</text>\n";
    }
    for (double d = ay.lo; d <= ay.hi; d += 1) {
        const double y = margin + plot - plot * (d - ay.lo) / (ay.hi - ay.lo);
        out << "<text x=\"" << margin - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">1e" << d << "</text>\n";
    }
    out << "<text x=\"" << size / 2 << "\" y=\"" << size - 20 << "\" text-anchor=\"middle\">" << xml_escape(x_label)
        << "</text>\n";
    out << "<text transform=\"translate(18," << size / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
        << xml_escape(y_label) << "</text>\n";
    for (const auto& [name, x, y] : points) {
        if (!(x > 0 && y > 0)) continue;
        const double px = margin + plot * ax.frac(x);
        const double py = margin + plot - plot * ay.frac(y);
        out << "<circle cx=\"" << px << "\" cy=\"" << py << "\" r=\"4\" fill=\"#c0504d\"><title>" << xml_escape(name)
            << "</title></circle>\n";
    }
    out << "</svg>\n";
}

}  // namespace

void write_report(const Report& rep, const std::vector<Row>& rows, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);

    {
        Csv c(dir / "campaignA_pairs.csv",
              {"kex_mode", "tls_group", "ml_scenario_id", "slh_scenario_id", "ml_elapsed_mean_ms",
               "slh_elapsed_mean_ms", "latency_ratio", "ml_bytes_read_mean", "slh_bytes_read_mean",
               "bytes_read_ratio", "ml_server_task_ms", "slh_server_task_ms", "server_taskclock_ratio",
               "ml_client_task_ms", "slh_client_task_ms", "client_taskclock_ratio"});
        for (const auto& p : rep.campaign_a)
            c.row(kex_mode_name(p.kex), tls_group_label(p.kex), p.ml_id, p.slh_id, p.ml_elapsed_ms, p.slh_elapsed_ms,
                  p.latency_ratio, p.ml_bytes_read, p.slh_bytes_read, p.bytes_read_ratio, p.ml_server_ms,
                  p.slh_server_ms, p.server_ratio, p.ml_client_ms, p.slh_client_ms, p.client_ratio);
    }
    {
        Csv c(dir / "strategy_matrix.csv",
              {"scenario_id", "slh_position_class", "elapsed_mean_ms", "bytes_read_mean", "server_task_ms",
               "latency_relative_to_baseline", "server_cpu_relative_to_baseline", "bytes_read_relative_to_baseline"});
        for (const auto& s : rep.strategy)
            c.row(s.scenario_id, s.slh_position, s.elapsed_mean_ms, s.bytes_read_mean, s.server_task_ms,
                  s.normalized.latency_relative_to_baseline, s.normalized.server_cpu_relative_to_baseline,
                  s.normalized.bytes_read_relative_to_baseline);
    }
    {
        Csv c(dir / "placement_summary.csv",
              {"placement_class", "n_scenarios", "mean_elapsed_ms", "median_elapsed_ms", "min_elapsed_ms",
               "max_elapsed_ms", "mean_latency_vs_baseline", "median_latency_vs_baseline", "mean_bytes_vs_baseline",
               "mean_server_cpu_vs_baseline", "mean_server_over_elapsed", "mean_client_over_elapsed"});
        for (const auto& s : rep.placement)
            c.row(placement_class_name(s.cls), s.n, s.mean_elapsed_ms, s.median_elapsed_ms, s.min_elapsed_ms,
                  s.max_elapsed_ms, s.mean_latency_vs_baseline, s.median_latency_vs_baseline,
                  s.mean_bytes_vs_baseline, s.mean_server_cpu_vs_baseline, s.mean_server_over_elapsed,
                  s.mean_client_over_elapsed);
    }
    {
        Csv c(dir / "depth_pairs.csv",
              {"pair_label", "depth2_scenario_id", "depth3_scenario_id", "depth2_elapsed_mean_ms",
               "depth3_elapsed_mean_ms", "delta_elapsed_mean_ms", "latency_ratio", "delta_bytes_read_mean",
               "delta_chain_bytes_unique", "delta_server_task_ms", "server_taskclock_ratio"});
        for (const auto& d : rep.depth)
            c.row(d.label, d.from_id, d.to_id, d.from_elapsed_ms, d.to_elapsed_ms, d.delta_elapsed_ms, d.latency_ratio,
                  d.delta_bytes_read, d.delta_chain_bytes_unique, d.delta_server_ms, d.server_ratio);
    }
    {
        Csv c(dir / "kex_pairs.csv",
              {"comparison_type", "family_label", "from_kex_mode", "to_kex_mode", "leaf_family", "depth",
               "from_scenario_id", "to_scenario_id", "elapsed_mean_from_ms", "elapsed_mean_to_ms",
               "latency_ratio_to_over_from", "bytes_read_from", "bytes_read_to", "bytes_read_ratio_to_over_from",
               "server_task_from_ms", "server_task_to_ms", "server_task_ratio_to_over_from"});
        for (const auto& k : rep.kex) {
            const auto& v = k.values;
            c.row(k.comparison, k.family_label, kex_mode_name(k.from_kex), kex_mode_name(k.to_kex),
                  family_name(k.leaf_family), k.depth, v.from_id, v.to_id, v.from_elapsed_ms, v.to_elapsed_ms,
                  v.latency_ratio, v.from_bytes_read, v.to_bytes_read, v.bytes_read_ratio, v.from_server_ms,
                  v.to_server_ms, v.server_ratio);
        }
    }
    {
        Csv c(dir / "correlations.csv", {"subset", "n_scenarios", "metric", "pearson_r", "spearman_rho"});
        for (const auto& k : rep.correlations)
            c.row(subset_name(k.subset), k.n, metric_name(k.metric), k.pearson_r, k.spearman_rho);
    }
    {
        Csv c(dir / "counterexamples.csv",
              {"rank", "transport_metric", "scenario_more_bytes_lower_latency", "scenario_less_bytes_higher_latency",
               "more_bytes_value", "less_bytes_value", "bytes_diff", "lower_latency_ms", "higher_latency_ms",
               "latency_ratio_higher_over_lower", "score"});
        for (const auto& k : rep.counterexamples)
            c.row(k.rank, metric_name(k.metric), k.more_bytes_id, k.fewer_bytes_id, k.more_bytes, k.fewer_bytes,
                  k.bytes_diff, k.lower_latency_ms, k.higher_latency_ms, k.latency_ratio, k.score);
    }
    {
        Csv c(dir / "regimes.csv",
              {"scenario_id", "elapsed_mean_ms", "client_task_ms", "server_task_ms", "client_over_elapsed",
               "server_over_elapsed", "srv_cli_ratio", "qualitative_perf_regime"});
        for (const auto& [id, label] : rep.regimes) {
            const auto& a = find_row(rows, id).agg;
            c.row(id, a.elapsed_mean_ms, a.client_task_clock_per_run_ms, a.server_task_clock_per_run_ms,
                  a.client_taskclock_over_elapsed, a.server_taskclock_over_elapsed, a.server_client_taskclock_ratio,
                  regime_name(label));
        }
    }
    {
        Csv c(dir / "capacity.csv",
              {"scenario_id", "kex_mode", "depth", "handshakes_per_core_second", "handshakes_per_vcpu_hour",
               "capacity_retained_vs_baseline", "infrastructure_multiplier_needed", "conceptual_perf_group"});
        for (const auto& k : rep.capacity)
            c.row(k.scenario_id, k.kex_mode, k.depth, k.handshakes_per_core_second, k.handshakes_per_vcpu_hour,
                  k.capacity_retained_vs_baseline, k.infrastructure_multiplier_needed, perf_group_name(k.group));
    }
    {
        Csv c(dir / "economics.csv",
              {"scenario_id", "conceptual_economic_class", "server_cpu_seconds_per_handshake", "cpu_hours_per_million",
               "cost_per_million", "extra_cost_per_million", "cost_multiplier_vs_baseline"});
        for (const auto& e : rep.economics)
            c.row(e.scenario_id, perf_group_name(e.group), e.server_cpu_seconds_per_handshake, e.cpu_hours_per_million,
                  e.cost_per_million, e.extra_cost_per_million, e.cost_multiplier_vs_baseline);
    }
    {
        Csv c(dir / "service_classes.csv",
              {"service_class", "conceptual_economic_class", "scenarios", "mean_daily_cost", "median_daily_cost",
               "mean_extra_daily_cost", "median_extra_daily_cost", "mean_monthly_cost", "median_monthly_cost",
               "mean_extra_monthly_cost", "median_extra_monthly_cost", "mean_annual_cost", "mean_extra_annual_cost"});
        for (const auto& s : rep.service_classes)
            c.row(s.service_class, perf_group_name(s.group), s.n, s.mean_daily, s.median_daily, s.mean_extra_daily,
                  s.median_extra_daily, s.mean_monthly, s.median_monthly, s.mean_extra_monthly, s.median_extra_monthly,
                  s.mean_annual, s.mean_extra_annual);
    }
    {
        Csv c(dir / "plausibility.csv",
              {"plausibility_rank", "scenario_id", "hierarchy_family_label", "slh_position_class",
               "latency_relative_to_baseline", "elapsed_mean_ms", "server_task_ms", "operational_plausibility"});
        for (const auto& p : rep.plausibility)
            c.row(p.rank, p.scenario_id, p.hierarchy, p.slh_position, p.latency_relative_to_baseline,
                  p.elapsed_mean_ms, p.server_task_ms, plausibility_name(p.label));
    }

    std::vector<std::pair<std::string, double>> latency, multiplier;
    std::vector<std::tuple<std::string, double, double>> cpu;
    for (const auto& r : rows) {
        latency.emplace_back(r.agg.scenario_id, r.agg.elapsed_mean_ms);
        cpu.emplace_back(r.agg.scenario_id, r.agg.client_task_clock_per_run_ms, r.agg.server_task_clock_per_run_ms);
    }
    for (const auto& k : rep.capacity) multiplier.emplace_back(k.scenario_id, k.infrastructure_multiplier_needed);
    bar_chart(dir / "latency_by_scenario.svg", "Mean handshake latency by scenario", "elapsed mean (ms)", latency);
    scatter(dir / "client_vs_server_cpu.svg", "Client vs server CPU time per handshake", "client CPU (ms)",
            "server CPU (ms)", cpu);
    bar_chart(dir / "infrastructure_multiplier.svg", "Infrastructure multiplier vs baseline", "multiplier",
              multiplier);
}

std::string render_markdown(const Report& rep) {
    std::ostringstream md;
    md << "# pqchainlab report\n";

    if (!rep.campaign_a.empty()) {
        md << "\n## Uniform ML vs uniform SLH (depth 2)\n\n| kex | latency x | bytes x | server cpu x |\n|---|---|---|---|\n";
        for (const auto& p : rep.campaign_a)
            md << "| " << kex_mode_name(p.kex) << " | " << f4(p.latency_ratio) << " | " << f4(p.bytes_read_ratio)
               << " | " << f4(p.server_ratio) << " |\n";
    }

    md << "\n## Placement classes\n\n| class | n | mean ms | mean vs baseline |\n|---|---|---|---|\n";
    for (const auto& c : rep.placement)
        md << "| " << placement_class_name(c.cls) << " | " << c.n << " | " << f4(c.mean_elapsed_ms) << " | "
           << f4(c.mean_latency_vs_baseline) << " |\n";

    md << "\n## Correlations with latency\n\n| subset | metric | n | pearson | spearman |\n|---|---|---|---|---|\n";
    for (const auto& c : rep.correlations)
        md << "| " << subset_name(c.subset) << " | " << metric_name(c.metric) << " | " << c.n << " | "
           << f4(c.pearson_r) << " | " << f4(c.spearman_rho) << " |\n";

    md << "\n## Cost regimes\n\n| scenario | regime |\n|---|---|\n";
    for (const auto& [id, label] : rep.regimes) md << "| " << id << " | " << regime_name(label) << " |\n";

    md << "\n## Capacity\n\n| scenario | hs/core-s | retained | multiplier |\n|---|---|---|---|\n";
    for (const auto& c : rep.capacity)
        md << "| " << c.scenario_id << " | " << f4(c.handshakes_per_core_second) << " | "
           << f4(c.capacity_retained_vs_baseline) << " | " << f4(c.infrastructure_multiplier_needed) << " |\n";

    if (!rep.plausibility.empty()) {
        md << "\n## Deployment plausibility\n\n| rank | scenario | latency x | label |\n|---|---|---|---|\n";
        for (const auto& p : rep.plausibility)
            md << "| " << p.rank << " | " << p.scenario_id << " | " << f4(p.latency_relative_to_baseline) << " | "
               << plausibility_name(p.label) << " |\n";
    }

    if (!rep.warnings.empty()) {
        md << "\n## Warnings\n\n";
        for (const auto& w : rep.warnings) md << "- " << w << "\n";
    }
    return md.str();
}

}  // namespace pqchain::analytics
