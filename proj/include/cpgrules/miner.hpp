#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "cpgrules/embeddings.hpp"
#include "cpgrules/errors.hpp"
#include "cpgrules/qualifier.hpp"
#include "cpgrules/text.hpp"
#include "cpgrules/text_types.hpp"

namespace cpgrules {

// A candidate bigram with its four weighting metrics, each min-max
// normalized to [0,100] across the candidate set, and their sum.
struct WeightedTerm {
    std::string term;
    double w_correlation = 0.0;
    double w_gini = 0.0;
    double w_infogain = 0.0;
    double w_gainratio = 0.0;
    double aggregate = 0.0;  // sum of the four, in [0,400]
    // Raw (un-normalized) metric values, kept so independent oracles can
    // check the arithmetic.
    double raw_correlation = 0.0;
    double raw_gini = 0.0;
    double raw_infogain = 0.0;
    double raw_gainratio = 0.0;
    int df = 0;  // sentences containing the bigram
};

struct MinerOptions {
    int min_df = 3;  // suppress hapax bigrams; correlation is unstable on tiny counts
};

namespace detail {

inline double entropy_bits(const std::array<double, kClassCount>& counts, double total) {
    if (total <= 0.0) return 0.0;
    double h = 0.0;
    for (double c : counts) {
        if (c <= 0.0) continue;
        double p = c / total;
        h -= p * std::log2(p);
    }
    return h;
}

inline double gini_impurity(const std::array<double, kClassCount>& counts, double total) {
    if (total <= 0.0) return 0.0;
    double s = 0.0;
    for (double c : counts) {
        double p = c / total;
        s += p * p;
    }
    return 1.0 - s;
}

// Per-bigram presence counts by class; mergeable so scoring can fan out
// over sentence shards.
struct MiningCounts {
    std::unordered_map<std::string, std::array<int, kClassCount>> presence;
    std::unordered_map<std::string, int> df;
    std::array<int, kClassCount> class_counts{};
    int sentences = 0;

    void add_sentence(const SentenceRecord& s) {
        if (!s.label) return;
        size_t c = static_cast<size_t>(*s.label);
        class_counts[c]++;
        ++sentences;
        std::set<std::string> seen;  // binary presence per sentence
        for (auto& bg : bigrams(s)) seen.insert(std::move(bg));
        for (const auto& bg : seen) {
            presence[bg][c]++;
            df[bg]++;
        }
    }

    void merge(const MiningCounts& other) {
        for (const auto& [bg, counts] : other.presence) {
            auto& mine = presence[bg];
            for (int c = 0; c < kClassCount; ++c)
                mine[static_cast<size_t>(c)] += counts[static_cast<size_t>(c)];
        }
        for (const auto& [bg, d] : other.df) df[bg] += d;
        for (int c = 0; c < kClassCount; ++c)
            class_counts[static_cast<size_t>(c)] += other.class_counts[static_cast<size_t>(c)];
        sentences += other.sentences;
    }
};

struct RawMetrics {
    double correlation, gini, infogain, gainratio;
};

// All four metrics over the 2 x |classes| contingency table of bigram
// presence vs. class label.
inline RawMetrics score_contingency(const std::array<int, kClassCount>& present,
                                    const std::array<int, kClassCount>& class_counts,
                                    int n_sentences) {
    std::array<double, kClassCount> with{}, without{}, totals{};
    double n1 = 0.0;
    double n = static_cast<double>(n_sentences);
    for (int c = 0; c < kClassCount; ++c) {
        size_t ci = static_cast<size_t>(c);
        with[ci] = static_cast<double>(present[ci]);
        totals[ci] = static_cast<double>(class_counts[ci]);
        without[ci] = totals[ci] - with[ci];
        n1 += with[ci];
    }
    double n0 = n - n1;

    RawMetrics m{};

    // correlation: max over classes of |phi| between presence and the
    // one-vs-rest class indicator
    m.correlation = 0.0;
    for (int c = 0; c < kClassCount; ++c) {
        size_t ci = static_cast<size_t>(c);
        if (totals[ci] <= 0.0) continue;
        double n11 = with[ci];
        double n10 = n1 - n11;
        double n01 = without[ci];
        double n00 = n0 - n01;
        double colc = totals[ci];
        double colnot = n - colc;
        double denom = n1 * n0 * colc * colnot;
        if (denom <= 0.0) continue;
        double phi = (n11 * n00 - n10 * n01) / std::sqrt(denom);
        m.correlation = std::max(m.correlation, std::abs(phi));
    }

    // Gini impurity decrease of the presence/absence split
    m.gini = gini_impurity(totals, n) -
             (n1 / n) * gini_impurity(with, n1) - (n0 / n) * gini_impurity(without, n0);

    // information gain = mutual information I(presence; class), in bits
    m.infogain = entropy_bits(totals, n) -
                 (n1 / n) * entropy_bits(with, n1) - (n0 / n) * entropy_bits(without, n0);

    // gain ratio = IG / split entropy of the presence variable
    std::array<double, kClassCount> split{};
    split[0] = n1;
    split[1] = n0;
    double split_entropy = entropy_bits(split, n);
    m.gainratio = split_entropy > 0.0 ? m.infogain / split_entropy : 0.0;
    return m;
}

}  // namespace detail

// Scores every bigram occurring in at least min_df labeled sentences.
// Bigrams must have been generated with stop words retained. Result is
// sorted by aggregate weight descending (ties: term ascending).
inline std::vector<WeightedTerm> score_terms(const std::vector<SentenceRecord>& corpus,
                                             const MinerOptions& opts = {}) {
    detail::MiningCounts counts;
    for (const auto& s : corpus) counts.add_sentence(s);

    int classes_present = 0;
    for (int c : counts.class_counts)
        if (c > 0) ++classes_present;
    if (classes_present < 2)
        throw InsufficientData("qualifier mining needs labeled sentences of at least two classes");

    std::vector<WeightedTerm> terms;
    for (const auto& [bg, present] : counts.presence) {
        int df = counts.df.at(bg);
        if (df < opts.min_df) continue;
        WeightedTerm t;
        t.term = bg;
        t.df = df;
        auto raw = detail::score_contingency(present, counts.class_counts, counts.sentences);
        t.raw_correlation = raw.correlation;
        t.raw_gini = raw.gini;
        t.raw_infogain = raw.infogain;
        t.raw_gainratio = raw.gainratio;
        terms.push_back(std::move(t));
    }

    // min-max normalize each metric to [0,100] across candidates
    auto normalize = [&terms](double WeightedTerm::* raw, double WeightedTerm::* norm) {
        if (terms.empty()) return;
        double lo = terms.front().*raw, hi = terms.front().*raw;
        for (const auto& t : terms) {
            lo = std::min(lo, t.*raw);
            hi = std::max(hi, t.*raw);
        }
        for (auto& t : terms) t.*norm = hi > lo ? 100.0 * (t.*raw - lo) / (hi - lo) : 0.0;
    };
    normalize(&WeightedTerm::raw_correlation, &WeightedTerm::w_correlation);
    normalize(&WeightedTerm::raw_gini, &WeightedTerm::w_gini);
    normalize(&WeightedTerm::raw_infogain, &WeightedTerm::w_infogain);
    normalize(&WeightedTerm::raw_gainratio, &WeightedTerm::w_gainratio);
    for (auto& t : terms)
        t.aggregate = t.w_correlation + t.w_gini + t.w_infogain + t.w_gainratio;

    std::sort(terms.begin(), terms.end(), [](const WeightedTerm& a, const WeightedTerm& b) {
        if (a.aggregate != b.aggregate) return a.aggregate > b.aggregate;
        return a.term < b.term;
    });
    return terms;
}

// Keeps exactly the terms with aggregate strictly greater than the
// threshold, order preserved.
inline std::vector<WeightedTerm> filter_qualifiers(const std::vector<WeightedTerm>& terms,
                                                   double threshold = 50.0) {
    std::vector<WeightedTerm> kept;
    for (const auto& t : terms)
        if (t.aggregate > threshold) kept.push_back(t);
    return kept;
}

inline void write_mined_report(const std::vector<WeightedTerm>& terms, std::ostream& out) {
    out << "term\tw_correlation\tw_gini\tw_infogain\tw_gainratio\taggregate\tdf\n";
    for (const auto& t : terms) {
        out << t.term << '\t' << t.w_correlation << '\t' << t.w_gini << '\t' << t.w_infogain
            << '\t' << t.w_gainratio << '\t' << t.aggregate << '\t' << t.df << '\n';
    }
}

// Sparse candidate-expansion matrix: one row per source qualifier, holding
// only the admitted entries (cosine >= alpha).
struct ExpansionMatrix {
    double alpha = 0.5;
    std::map<std::string, std::map<std::string, double>> rows;
};

struct ExpansionResult {
    std::vector<QualifierEntry> enriched;  // originals followed by expansions
    ExpansionMatrix matrix;
    std::vector<std::string> skipped;  // qualifiers with no usable vector
};

// Enriches the qualifier set with embedding-table terms whose cosine
// similarity to a qualifier's phrase vector reaches alpha. Expansions
// inherit the parent's directions and weight; duplicates keep the
// max-similarity parent.
inline ExpansionResult expand_qualifiers(const std::vector<QualifierEntry>& qualifiers,
                                         const EmbeddingTable& table, double alpha = 0.5) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("expansion alpha must be in [0, 1]");
    ExpansionResult result;
    result.matrix.alpha = alpha;
    result.enriched = qualifiers;

    std::set<std::string> existing;
    for (const auto& q : qualifiers) existing.insert(q.phrase);

    struct Best {
        double sim;
        const QualifierEntry* parent;
    };
    std::map<std::string, Best> admitted;

    for (const auto& q : qualifiers) {
        auto vec = table.phrase_vector(q.phrase);
        if (!vec) {
            result.skipped.push_back(q.phrase);
            continue;
        }
        auto& row = result.matrix.rows[q.phrase];
        for (const auto& [term, cand] : table.entries()) {
            if (existing.count(term)) continue;
            double sim;
            try {
                sim = cosine(*vec, cand);
            } catch (const ZeroVector&) {
                continue;
            }
            if (sim < alpha) continue;  // below-threshold entries stay zero / absent
            row[term] = sim;
            auto it = admitted.find(term);
            if (it == admitted.end() || sim > it->second.sim ||
                (sim == it->second.sim && q.phrase < it->second.parent->phrase)) {
                admitted[term] = {sim, &q};
            }
        }
    }

    for (const auto& [term, best] : admitted) {
        QualifierEntry e;
        e.phrase = term;
        e.weight = best.parent->weight;
        e.cond_dir = best.parent->cond_dir;
        e.act_dir = best.parent->act_dir;
        e.origin = "expanded(" + best.parent->phrase + ")";
        result.enriched.push_back(std::move(e));
    }
    return result;
}

}  // namespace cpgrules
