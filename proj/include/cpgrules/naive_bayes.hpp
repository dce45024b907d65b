#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "cpgrules/errors.hpp"
#include "cpgrules/gru.hpp"
#include "cpgrules/metrics.hpp"
#include "cpgrules/rng.hpp"
#include "cpgrules/text_types.hpp"

namespace cpgrules {

// Multinomial naive Bayes over normalized unigram counts with add-one
// smoothing; the baseline classifier the GRU is compared against.
class NaiveBayesModel {
public:
    void fit(const std::vector<const SentenceRecord*>& train) {
        for (const auto* s : train) {
            size_t c = static_cast<size_t>(*s->label);
            class_docs_[c] += 1.0;
            for (const auto& t : s->tokens) {
                token_counts_[t.normalized][c] += 1.0;
                class_tokens_[c] += 1.0;
            }
        }
        total_docs_ = 0.0;
        for (double d : class_docs_) total_docs_ += d;
        vocab_ = static_cast<double>(token_counts_.size());
    }

    Prediction predict(const SentenceRecord& sentence) const {
        if (sentence.tokens.empty()) throw EmptySentence();
        std::array<double, kClassCount> logp;
        std::array<bool, kClassCount> seen{};
        for (int c = 0; c < kClassCount; ++c) {
            size_t ci = static_cast<size_t>(c);
            if (class_docs_[ci] == 0.0) continue;  // class absent from training
            seen[ci] = true;
            double lp = std::log(class_docs_[ci] / total_docs_);
            double denom = class_tokens_[ci] + vocab_;
            for (const auto& t : sentence.tokens) {
                auto it = token_counts_.find(t.normalized);
                double tf = it == token_counts_.end() ? 0.0 : it->second[ci];
                lp += std::log((tf + 1.0) / denom);
            }
            logp[ci] = lp;
        }
        // normalize in log space over the classes that exist
        double mx = -std::numeric_limits<double>::infinity();
        for (int c = 0; c < kClassCount; ++c)
            if (seen[static_cast<size_t>(c)]) mx = std::max(mx, logp[static_cast<size_t>(c)]);
        double sum = 0.0;
        for (int c = 0; c < kClassCount; ++c)
            if (seen[static_cast<size_t>(c)]) sum += std::exp(logp[static_cast<size_t>(c)] - mx);
        Prediction pred;
        pred.scores.fill(0.0);
        for (int c = 0; c < kClassCount; ++c)
            if (seen[static_cast<size_t>(c)])
                pred.scores[static_cast<size_t>(c)] =
                    std::exp(logp[static_cast<size_t>(c)] - mx) / sum;
        int best = 0;
        for (int c = 1; c < kClassCount; ++c)
            if (pred.scores[static_cast<size_t>(c)] > pred.scores[static_cast<size_t>(best)])
                best = c;
        pred.label = static_cast<SentenceClass>(best);
        return pred;
    }

private:
    std::unordered_map<std::string, std::array<double, kClassCount>> token_counts_;
    std::array<double, kClassCount> class_docs_{};
    std::array<double, kClassCount> class_tokens_{};
    double total_docs_ = 0.0;
    double vocab_ = 0.0;
};

struct NaiveBayesResult {
    NaiveBayesModel model;
    Metrics metrics;
};

// Same seeded split machinery as the GRU so both classifiers see identical
// train/test partitions for a given config.
inline NaiveBayesResult train_naive_bayes(const std::vector<SentenceRecord>& corpus,
                                          const TrainConfig& config) {
    config.validate();
    std::vector<const SentenceRecord*> usable;
    for (const auto& s : corpus)
        if (s.label && !s.tokens.empty()) usable.push_back(&s);
    if (usable.empty()) throw InsufficientData("no labeled, tokenized sentences in corpus");
    detail::check_labels(usable);

    Rng rng(config.seed);
    auto [train_idx, test_idx] = split_train_test(usable.size(), config.train_fraction, rng);

    NaiveBayesResult result;
    std::vector<const SentenceRecord*> train;
    train.reserve(train_idx.size());
    for (size_t i : train_idx) train.push_back(usable[i]);
    result.model.fit(train);

    std::vector<int> gold, pred;
    for (size_t i : test_idx) {
        gold.push_back(static_cast<int>(*usable[i]->label));
        pred.push_back(static_cast<int>(result.model.predict(*usable[i]).label));
    }
    result.metrics = compute_metrics(gold, pred);
    return result;
}

}  // namespace cpgrules
