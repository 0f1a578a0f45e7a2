#include "causalq/metrics.hpp"

#include <json.hpp>

namespace causalq {

namespace {

void check_same_size(const WeightedDag& g, const WeightedDag& truth, const char* where) {
    if (g.num_vars() != truth.num_vars())
        throw DimensionMismatch(std::string(where) + ": graphs disagree in size");
}

}  // namespace

int shd(const WeightedDag& g, const WeightedDag& truth) {
    check_same_size(g, truth, "shd");
    const int d = g.num_vars();
    int dist = 0;
    for (int i = 0; i < d; ++i) {
        for (int j = i + 1; j < d; ++j) {
            const bool g_fwd = g.has_edge(i, j), g_bwd = g.has_edge(j, i);
            const bool t_fwd = truth.has_edge(i, j), t_bwd = truth.has_edge(j, i);
            const bool g_any = g_fwd || g_bwd, t_any = t_fwd || t_bwd;
            if (g_any != t_any) ++dist;                                   // add or delete
            else if (g_any && (g_fwd != t_fwd || g_bwd != t_bwd)) ++dist;  // reversal
        }
    }
    return dist;
}

double e_shd(const std::vector<WeightedDag>& graphs, const WeightedDag& truth) {
    if (graphs.empty()) throw EmptyList("e_shd: no graphs");
    double total = 0.0;
    for (const auto& g : graphs) total += shd(g, truth);
    return total / static_cast<double>(graphs.size());
}

EdgeRates tpr_fdr_f1(const WeightedDag& g, const WeightedDag& truth) {
    check_same_size(g, truth, "tpr_fdr_f1");
    const auto counts = edge_counts(g, truth);
    const int truth_edges = truth.edge_count();
    if (truth_edges == 0) throw EmptyList("tpr_fdr_f1: truth graph has no edges");
    EdgeRates rates;
    rates.tpr = static_cast<double>(counts.correct) / truth_edges;
    rates.fdr = static_cast<double>(counts.total - counts.correct) / std::max(counts.total, 1);
    const double precision = 1.0 - rates.fdr;
    const double recall = rates.tpr;
    rates.f1 = (precision + recall > 0.0) ? 2.0 * precision * recall / (precision + recall) : 0.0;
    return rates;
}

EdgeCounts edge_counts(const WeightedDag& g, const WeightedDag& truth) {
    check_same_size(g, truth, "edge_counts");
    EdgeCounts counts;
    const int d = g.num_vars();
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            if (!g.has_edge(i, j)) continue;
            ++counts.total;
            if (truth.has_edge(i, j)) ++counts.correct;
        }
    }
    return counts;
}

namespace {

GraphMetrics graph_metrics(const WeightedDag& g, const WeightedDag& truth) {
    GraphMetrics m;
    const auto counts = edge_counts(g, truth);
    m.total_edges = counts.total;
    m.correct_edges = counts.correct;
    const auto rates = tpr_fdr_f1(g, truth);
    m.tpr = rates.tpr;
    m.fdr = rates.fdr;
    m.f1 = rates.f1;
    m.shd = shd(g, truth);
    return m;
}

nlohmann::json metrics_json(const GraphMetrics& m) {
    return {{"total_edges", m.total_edges}, {"correct_edges", m.correct_edges},
            {"tpr", m.tpr},                 {"fdr", m.fdr},
            {"f1", m.f1},                   {"shd", m.shd}};
}

}  // namespace

MetricsReport evaluate(const WeightedDag& g, const WeightedDag& truth) {
    MetricsReport report;
    report.summary = graph_metrics(g, truth);
    report.e_shd = report.summary.shd;
    return report;
}

MetricsReport evaluate(const std::vector<WeightedDag>& graphs, const WeightedDag& truth) {
    if (graphs.empty()) throw EmptyList("evaluate: no graphs");
    MetricsReport report;
    double shd_total = 0.0;
    for (const auto& g : graphs) {
        report.per_graph.push_back(graph_metrics(g, truth));
        const auto& m = report.per_graph.back();
        report.summary.total_edges += m.total_edges;
        report.summary.correct_edges += m.correct_edges;
        report.summary.tpr += m.tpr;
        report.summary.fdr += m.fdr;
        report.summary.f1 += m.f1;
        shd_total += m.shd;
    }
    const double n = static_cast<double>(graphs.size());
    report.summary.total_edges = static_cast<int>(report.summary.total_edges / n);
    report.summary.correct_edges = static_cast<int>(report.summary.correct_edges / n);
    report.summary.tpr /= n;
    report.summary.fdr /= n;
    report.summary.f1 /= n;
    report.e_shd = shd_total / n;
    report.summary.shd = static_cast<int>(report.e_shd);
    return report;
}

std::string metrics_to_json(const MetricsReport& report) {
    nlohmann::json j;
    j["summary"] = metrics_json(report.summary);
    j["e_shd"] = report.e_shd;
    if (!report.per_graph.empty()) {
        auto arr = nlohmann::json::array();
        for (const auto& m : report.per_graph) arr.push_back(metrics_json(m));
        j["per_graph"] = std::move(arr);
    }
    return j.dump(2);
}

}  // namespace causalq
