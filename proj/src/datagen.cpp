#include "causalq/datagen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace causalq {

void GenConfig::validate() const {
    if (num_vars < 2) throw ConfigError("GenConfig: need at least 2 variables");
    if (num_samples < num_vars + 2)
        throw TooFewSamples("GenConfig: need n >= d + 2, got n = " + std::to_string(num_samples));
    if (!(0.0 < weight_low && weight_low < weight_high))
        throw ConfigError("GenConfig: need 0 < weight_low < weight_high");
    if (noise_std <= 0.0) throw ConfigError("GenConfig: noise std must be positive");
}

double GenConfig::edge_probability() const {
    const double pairs = num_vars * (num_vars - 1) / 2.0;
    return std::min(1.0, resolved_edges() / pairs);
}

WeightedDag er_dag(const GenConfig& config, Rng& rng) {
    config.validate();
    const int d = config.num_vars;
    std::vector<int> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);

    const double p = config.edge_probability();
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> magnitude(config.weight_low, config.weight_high);

    WeightedDag g(d);
    for (int a = 0; a < d; ++a) {
        for (int b = a + 1; b < d; ++b) {
            if (unit(rng) >= p) continue;
            const double w = magnitude(rng);
            const bool negative = unit(rng) < 0.5;
            g.set_weight(order[a], order[b], negative ? -w : w);
        }
    }
    return g;
}

Dataset linear_gaussian_sample(const WeightedDag& graph, int num_samples, double noise_std,
                               Rng& rng) {
    const int d = graph.num_vars();
    const Ordering topo = graph.topological_order();  // CyclicGraph on cycles

    // Noise is drawn column by column in variable order, independent of the
    // topological order, so relabeled graphs replay the same noise.
    std::normal_distribution<double> noise(0.0, noise_std);
    std::vector<std::vector<double>> eps(d, std::vector<double>(num_samples));
    for (int j = 0; j < d; ++j)
        for (int t = 0; t < num_samples; ++t) eps[j][t] = noise(rng);

    Dataset data;
    data.names = graph.names();
    data.columns.assign(d, std::vector<double>(num_samples, 0.0));
    for (int j : topo) {
        auto& col = data.columns[j];
        col = eps[j];
        for (int i = 0; i < d; ++i) {
            const double w = graph.weight(i, j);
            if (w == 0.0) continue;
            const auto& parent = data.columns[i];
            for (int t = 0; t < num_samples; ++t) col[t] += w * parent[t];
        }
    }
    return data;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

std::string trimmed(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

}  // namespace

Dataset load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("load_csv: cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw ParseError("load_csv: '" + path + "' is empty");
    Dataset data;
    for (const auto& name : split_line(line)) data.names.push_back(trimmed(name));
    const int d = static_cast<int>(data.names.size());
    if (d == 0) throw ParseError("load_csv: header row has no columns");
    data.columns.assign(d, {});

    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (trimmed(line).empty()) continue;
        const auto fields = split_line(line);
        if (static_cast<int>(fields.size()) != d)
            throw ParseError("load_csv: row " + std::to_string(row) + " has " +
                             std::to_string(fields.size()) + " fields, expected " +
                             std::to_string(d));
        for (int j = 0; j < d; ++j) {
            const std::string cell = trimmed(fields[j]);
            double value = 0.0;
            const char* begin = cell.data();
            const char* end = begin + cell.size();
            const auto [ptr, ec] = std::from_chars(begin, end, value);
            if (ec != std::errc{} || ptr != end) {
                // Keep NaN/inf spellings distinguishable from junk: they
                // parse but are rejected as non-finite.
                char* strtod_end = nullptr;
                value = std::strtod(cell.c_str(), &strtod_end);
                if (strtod_end != cell.c_str() + cell.size() || cell.empty())
                    throw ParseError("load_csv: row " + std::to_string(row) + ", column " +
                                     std::to_string(j) + ": cannot parse '" + cell + "'");
            }
            if (!std::isfinite(value))
                throw NonFiniteValue("load_csv: non-finite value at row " + std::to_string(row) +
                                     ", column " + std::to_string(j));
            data.columns[j].push_back(value);
        }
    }
    data.validate();  // TooFewSamples among others
    return data;
}

void save_csv(const Dataset& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("save_csv: cannot open '" + path + "' for writing");
    out.precision(17);
    for (int j = 0; j < data.num_vars(); ++j) {
        if (j) out << ",";
        out << data.names[j];
    }
    out << "\n";
    for (int t = 0; t < data.num_samples(); ++t) {
        for (int j = 0; j < data.num_vars(); ++j) {
            if (j) out << ",";
            out << data.columns[j][t];
        }
        out << "\n";
    }
    if (!out) throw IoError("save_csv: write to '" + path + "' failed");
}

}  // namespace causalq
