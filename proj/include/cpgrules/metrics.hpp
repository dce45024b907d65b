#pragma once

#include <array>
#include <cmath>
#include <vector>

#include <json.hpp>

#include "cpgrules/errors.hpp"
#include "cpgrules/text_types.hpp"

namespace cpgrules {

// Held-out classification metrics. Confusion matrix rows are true classes,
// columns predicted classes, in the fixed class order C-A, C-C, A, NA.
struct Metrics {
    double accuracy = 0.0;
    std::array<std::array<int, kClassCount>, kClassCount> confusion{};
    std::array<double, kClassCount> precision{};
    std::array<double, kClassCount> recall{};
    int total = 0;

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["accuracy"] = accuracy;
        j["total"] = total;
        nlohmann::json conf = nlohmann::json::array();
        for (const auto& row : confusion) conf.push_back(row);
        j["confusion"] = conf;
        nlohmann::json per_class;
        for (int c = 0; c < kClassCount; ++c) {
            per_class[kClassNames[static_cast<size_t>(c)]] = {
                {"precision", precision[static_cast<size_t>(c)]},
                {"recall", recall[static_cast<size_t>(c)]},
            };
        }
        j["per_class"] = per_class;
        j["class_order"] = kClassNames;
        return j;
    }
};

inline Metrics compute_metrics(const std::vector<int>& gold, const std::vector<int>& predicted) {
    if (gold.empty() || gold.size() != predicted.size())
        throw EmptyTestSet();
    Metrics m;
    m.total = static_cast<int>(gold.size());
    int correct = 0;
    for (size_t i = 0; i < gold.size(); ++i) {
        m.confusion[static_cast<size_t>(gold[i])][static_cast<size_t>(predicted[i])]++;
        if (gold[i] == predicted[i]) ++correct;
    }
    m.accuracy = static_cast<double>(correct) / static_cast<double>(m.total);
    for (int c = 0; c < kClassCount; ++c) {
        int row_sum = 0, col_sum = 0;
        for (int o = 0; o < kClassCount; ++o) {
            row_sum += m.confusion[static_cast<size_t>(c)][static_cast<size_t>(o)];
            col_sum += m.confusion[static_cast<size_t>(o)][static_cast<size_t>(c)];
        }
        int tp = m.confusion[static_cast<size_t>(c)][static_cast<size_t>(c)];
        m.recall[static_cast<size_t>(c)] = row_sum ? static_cast<double>(tp) / row_sum : 0.0;
        m.precision[static_cast<size_t>(c)] = col_sum ? static_cast<double>(tp) / col_sum : 0.0;
    }
    return m;
}

// Mean/std aggregation across independent runs (the paper reports averages
// over multiple runs without giving the count; the harness exposes --runs).
struct RunAggregate {
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;
    int runs = 0;
};

inline RunAggregate aggregate_runs(const std::vector<Metrics>& runs) {
    RunAggregate agg;
    agg.runs = static_cast<int>(runs.size());
    if (runs.empty()) return agg;
    double sum = 0.0;
    for (const auto& m : runs) sum += m.accuracy;
    agg.mean_accuracy = sum / static_cast<double>(runs.size());
    double var = 0.0;
    for (const auto& m : runs) {
        double d = m.accuracy - agg.mean_accuracy;
        var += d * d;
    }
    agg.std_accuracy = runs.size() > 1 ? std::sqrt(var / static_cast<double>(runs.size() - 1)) : 0.0;
    return agg;
}

}  // namespace cpgrules
