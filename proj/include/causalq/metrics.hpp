#pragma once

#include <string>
#include <vector>

#include "causalq/graph.hpp"

namespace causalq {

/// Structural Hamming distance: edge additions, deletions, and reversals
/// needed to turn g into truth, a reversal counting 1.
int shd(const WeightedDag& g, const WeightedDag& truth);

/// Mean SHD of a sampled set of graphs against the truth.
double e_shd(const std::vector<WeightedDag>& graphs, const WeightedDag& truth);

struct EdgeRates {
    double tpr = 0.0;
    double fdr = 0.0;
    double f1 = 0.0;
};

/// Direction-exact rates: a true positive must match the edge direction.
EdgeRates tpr_fdr_f1(const WeightedDag& g, const WeightedDag& truth);

struct EdgeCounts {
    int total = 0;
    int correct = 0;
};

EdgeCounts edge_counts(const WeightedDag& g, const WeightedDag& truth);

struct GraphMetrics {
    int total_edges = 0;
    int correct_edges = 0;
    double tpr = 0.0;
    double fdr = 0.0;
    double f1 = 0.0;
    int shd = 0;
};

struct MetricsReport {
    GraphMetrics summary;            // the single graph, or means over the list
    double e_shd = 0.0;
    std::vector<GraphMetrics> per_graph;  // breakdown when evaluating a list
};

MetricsReport evaluate(const WeightedDag& g, const WeightedDag& truth);
MetricsReport evaluate(const std::vector<WeightedDag>& graphs, const WeightedDag& truth);

std::string metrics_to_json(const MetricsReport& report);

}  // namespace causalq
