#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "cpgrules/miner.hpp"
#include "cpgrules/rng.hpp"
#include "cpgrules/text.hpp"

using namespace cpgrules;

namespace {

SentenceRecord labeled(const std::string& raw, SentenceClass c) {
    SentenceRecord s;
    s.raw = raw;
    s.label = c;
    tokenize(s);  // stop words retained for mining
    return s;
}

// ---- independent oracle ----------------------------------------------
// Enumerates the corpus explicitly and computes each metric through a
// different algebraic route than the implementation: information gain via
// H(P) + H(C) - H(P,C), correlation via the Pearson sum formulas over
// per-sentence 0/1 arrays.

struct OracleMetrics {
    double correlation, gini, infogain, gainratio;
};

double h_bits(const std::vector<double>& counts, double total) {
    double h = 0;
    for (double c : counts)
        if (c > 0) h -= (c / total) * std::log2(c / total);
    return h;
}

OracleMetrics oracle_score(const std::vector<SentenceRecord>& corpus, const std::string& term) {
    std::vector<int> presence, label;
    for (const auto& s : corpus) {
        if (!s.label) continue;
        auto bg = bigrams(s);
        presence.push_back(std::count(bg.begin(), bg.end(), term) > 0 ? 1 : 0);
        label.push_back(static_cast<int>(*s.label));
    }
    double n = static_cast<double>(presence.size());

    double joint[2][kClassCount] = {};
    for (size_t i = 0; i < presence.size(); ++i)
        joint[presence[i]][label[i]] += 1.0;
    std::vector<double> pm = {0, 0};
    std::vector<double> cm(kClassCount, 0.0);
    std::vector<double> flat;
    for (int p = 0; p < 2; ++p)
        for (int c = 0; c < kClassCount; ++c) {
            pm[static_cast<size_t>(p)] += joint[p][c];
            cm[static_cast<size_t>(c)] += joint[p][c];
            flat.push_back(joint[p][c]);
        }

    OracleMetrics m{};
    m.infogain = h_bits(pm, n) + h_bits(cm, n) - h_bits(flat, n);
    double hp = h_bits(pm, n);
    m.gainratio = hp > 0 ? m.infogain / hp : 0.0;

    auto gini_of = [](const std::vector<double>& counts, double total) {
        if (total <= 0) return 0.0;
        double s = 0;
        for (double c : counts) s += (c / total) * (c / total);
        return 1.0 - s;
    };
    double weighted = 0;
    for (int p = 0; p < 2; ++p) {
        std::vector<double> branch(kClassCount);
        for (int c = 0; c < kClassCount; ++c) branch[static_cast<size_t>(c)] = joint[p][c];
        if (pm[static_cast<size_t>(p)] > 0)
            weighted +=
                (pm[static_cast<size_t>(p)] / n) * gini_of(branch, pm[static_cast<size_t>(p)]);
    }
    m.gini = gini_of(cm, n) - weighted;

    m.correlation = 0;
    for (int c = 0; c < kClassCount; ++c) {
        double sx = 0, sy = 0, sxy = 0, sxx = 0, syy = 0;
        for (size_t i = 0; i < presence.size(); ++i) {
            double x = presence[i];
            double y = label[i] == c ? 1.0 : 0.0;
            sx += x;
            sy += y;
            sxy += x * y;
            sxx += x * x;
            syy += y * y;
        }
        double vx = sxx - sx * sx / n;
        double vy = syy - sy * sy / n;
        if (vx <= 0 || vy <= 0) continue;
        double r = (sxy - sx * sy / n) / std::sqrt(vx * vy);
        m.correlation = std::max(m.correlation, std::abs(r));
    }
    return m;
}

std::vector<SentenceRecord> random_corpus(int sentences, std::uint64_t seed) {
    Rng rng(seed);
    const std::vector<std::string> vocab = {"alpha", "beta",  "gamma", "delta", "sigma",
                                            "tau",   "omega", "kappa", "zeta",  "eta"};
    std::vector<SentenceRecord> corpus;
    for (int i = 0; i < sentences; ++i) {
        int len = 3 + static_cast<int>(rng.below(5));
        std::vector<std::string> words;
        for (int w = 0; w < len; ++w) words.push_back(vocab[rng.below(vocab.size())]);
        corpus.push_back(
            labeled(str::join(words, " "), static_cast<SentenceClass>(rng.below(kClassCount))));
    }
    corpus[0].label = SentenceClass::ConditionAction;  // guarantee two classes
    corpus[1].label = SentenceClass::NotApplicable;
    return corpus;
}

std::set<std::string> phrases_of(const std::vector<QualifierEntry>& entries) {
    std::set<std::string> out;
    for (const auto& e : entries) out.insert(e.phrase);
    return out;
}

}  // namespace

TEST_CASE("a perfectly class-discriminative bigram earns the full information gain") {
    std::vector<SentenceRecord> corpus = {
        labeled("the committee notes smoking leads to cancer",
                SentenceClass::ConditionConsequence),
        labeled("obesity often leads to diabetes", SentenceClass::ConditionConsequence),
        labeled("stress leads to illness", SentenceClass::ConditionConsequence),
        labeled("the committee met in may", SentenceClass::NotApplicable),
        labeled("the committee met in june", SentenceClass::NotApplicable),
        labeled("the committee met in july", SentenceClass::NotApplicable),
    };
    auto terms = score_terms(corpus, {.min_df = 3});
    auto leads = std::find_if(terms.begin(), terms.end(),
                              [](const WeightedTerm& t) { return t.term == "leads to"; });
    REQUIRE(leads != terms.end());
    // both branches of the split are pure: IG = H(class) = 1 bit exactly
    CHECK(leads->raw_infogain == 1.0);
    CHECK(leads->w_infogain == 100.0);  // max candidate normalizes to 100
    CHECK(leads->raw_correlation == Catch::Approx(1.0));
    CHECK(leads->aggregate > 50.0);

    // "the committee" straddles both classes and must score strictly lower
    auto committee = std::find_if(terms.begin(), terms.end(),
                                  [](const WeightedTerm& t) { return t.term == "the committee"; });
    REQUIRE(committee != terms.end());
    CHECK(committee->raw_infogain < leads->raw_infogain);
}

TEST_CASE("a bigram distributed identically across classes carries zero signal") {
    std::vector<SentenceRecord> corpus = {
        labeled("x y a b", SentenceClass::ConditionAction),
        labeled("c d a b", SentenceClass::ConditionAction),
        labeled("x y e f", SentenceClass::NotApplicable),
        labeled("g h e f", SentenceClass::NotApplicable),
    };
    auto terms = score_terms(corpus, {.min_df = 1});
    auto xy = std::find_if(terms.begin(), terms.end(),
                           [](const WeightedTerm& t) { return t.term == "x y"; });
    REQUIRE(xy != terms.end());
    CHECK(xy->raw_infogain == 0.0);
    CHECK(xy->raw_gini == 0.0);
    CHECK(xy->raw_correlation == 0.0);
}

TEST_CASE("every raw metric matches the brute-force contingency oracle to 1e-12") {
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        auto corpus = random_corpus(6 + static_cast<int>(seed), seed * 31 + 5);
        REQUIRE(corpus.size() <= 20);
        auto terms = score_terms(corpus, {.min_df = 1});
        REQUIRE_FALSE(terms.empty());
        for (const auto& t : terms) {
            auto want = oracle_score(corpus, t.term);
            INFO("seed " << seed << " term '" << t.term << "'");
            CHECK(std::abs(t.raw_correlation - want.correlation) < 1e-12);
            CHECK(std::abs(t.raw_gini - want.gini) < 1e-12);
            CHECK(std::abs(t.raw_infogain - want.infogain) < 1e-12);
            CHECK(std::abs(t.raw_gainratio - want.gainratio) < 1e-12);
        }
    }
}

TEST_CASE("normalization maps the extreme candidates to exactly 100 and 0") {
    auto corpus = random_corpus(18, 99);
    auto terms = score_terms(corpus, {.min_df = 1});
    REQUIRE(terms.size() >= 2);
    for (auto metric : {&WeightedTerm::w_correlation, &WeightedTerm::w_gini,
                        &WeightedTerm::w_infogain, &WeightedTerm::w_gainratio}) {
        double lo = 1e9, hi = -1e9;
        for (const auto& t : terms) {
            lo = std::min(lo, t.*metric);
            hi = std::max(hi, t.*metric);
            CHECK(t.*metric >= 0.0);
            CHECK(t.*metric <= 100.0);
        }
        if (hi > lo) {
            CHECK(hi == 100.0);
            CHECK(lo == 0.0);
        }
    }
    for (const auto& t : terms)
        CHECK(t.aggregate ==
              Catch::Approx(t.w_correlation + t.w_gini + t.w_infogain + t.w_gainratio)
                  .margin(1e-9));
}

TEST_CASE("mining requires at least two classes") {
    std::vector<SentenceRecord> corpus = {
        labeled("a b c", SentenceClass::NotApplicable),
        labeled("a b d", SentenceClass::NotApplicable),
    };
    CHECK_THROWS_AS(score_terms(corpus, {.min_df = 1}), InsufficientData);
}

TEST_CASE("filter keeps exactly the terms above the threshold") {
    WeightedTerm a, b, c;
    a.term = "leads to";
    a.aggregate = 235;
    b.term = "use of";
    b.aggregate = 53;
    c.term = "panel met";
    c.aggregate = 49;
    std::vector<WeightedTerm> terms = {a, b, c};

    auto kept = filter_qualifiers(terms, 50);
    REQUIRE(kept.size() == 2);
    CHECK(kept[0].term == "leads to");
    CHECK(kept[1].term == "use of");

    CHECK(filter_qualifiers(terms, 0).size() == 3);
    CHECK(filter_qualifiers(terms, 235).empty());  // strictly greater: 235 itself is out
    CHECK(filter_qualifiers(terms, 400).empty());
}

TEST_CASE("filtering is monotone and a subset of its input") {
    auto corpus = random_corpus(20, 4242);
    auto terms = score_terms(corpus, {.min_df = 1});
    std::set<std::string> base;
    for (const auto& t : terms) base.insert(t.term);
    size_t last_size = terms.size();
    for (double threshold : {0.0, 25.0, 50.0, 100.0, 200.0, 400.0}) {
        auto kept = filter_qualifiers(terms, threshold);
        CHECK(kept.size() <= last_size);
        last_size = kept.size();
        for (const auto& t : kept) {
            CHECK(t.aggregate > threshold);
            CHECK(base.count(t.term) == 1);
        }
    }
}

TEST_CASE("expansion admits exactly the candidates at or above alpha") {
    EmbeddingTable table(2);
    table.insert("recommend", {1.0, 0.0});
    table.insert("advise", {0.95, std::sqrt(1 - 0.95 * 0.95)});
    table.insert("suggest", {0.8, std::sqrt(1 - 0.8 * 0.8)});
    table.insert("recommended", {0.99, std::sqrt(1 - 0.99 * 0.99)});
    table.insert("borderline", {0.49, std::sqrt(1 - 0.49 * 0.49)});
    table.insert("banana", {0.0, 1.0});

    QualifierEntry q;
    q.phrase = "recommend";
    q.weight = 120;
    q.cond_dir = Direction::Right;
    q.act_dir = Direction::Left;

    auto result = expand_qualifiers({q}, table, 0.5);
    auto phrases = phrases_of(result.enriched);
    CHECK(phrases.count("advise") == 1);
    CHECK(phrases.count("suggest") == 1);
    CHECK(phrases.count("recommended") == 1);
    CHECK(phrases.count("borderline") == 0);  // cosine 0.49 < alpha: matrix entry stays empty
    CHECK(phrases.count("banana") == 0);

    const auto& row = result.matrix.rows.at("recommend");
    CHECK(row.count("borderline") == 0);
    for (const auto& [term, sim] : row) {
        CHECK(sim >= 0.5);
        CHECK(std::abs(sim - cosine(table.at("recommend"), table.at(term))) < 1e-12);
    }

    // expansions inherit the parent's directions and weight
    int expanded = 0;
    for (const auto& e : result.enriched) {
        if (e.origin.rfind("expanded(", 0) == 0) {
            ++expanded;
            CHECK(e.cond_dir == q.cond_dir);
            CHECK(e.act_dir == q.act_dir);
            CHECK(e.weight == q.weight);
        }
    }
    CHECK(expanded == 3);
}

TEST_CASE("alpha = 1 admits only exact-duplicate directions") {
    EmbeddingTable table(2);
    table.insert("recommend", {1.0, 0.0});
    table.insert("twin", {2.0, 0.0});  // same direction, different magnitude
    table.insert("near", {0.999, 0.04});
    QualifierEntry q;
    q.phrase = "recommend";
    q.cond_dir = Direction::Left;
    q.act_dir = Direction::Right;
    auto result = expand_qualifiers({q}, table, 1.0);
    auto phrases = phrases_of(result.enriched);
    CHECK(phrases.count("twin") == 1);
    CHECK(phrases.count("near") == 0);
}

TEST_CASE("expansion matches a brute-force full-scan oracle on a 50-term table") {
    Rng rng(2024);
    EmbeddingTable table(6);
    for (int i = 0; i < 50; ++i) {
        Vector v(6);
        for (auto& x : v) x = rng.uniform(-1.0, 1.0);
        table.insert("w" + std::to_string(i), std::move(v));
    }
    std::vector<QualifierEntry> qs;
    for (const char* p : {"w0", "w7", "w33"}) {
        QualifierEntry q;
        q.phrase = p;
        q.cond_dir = Direction::Left;
        q.act_dir = Direction::Right;
        qs.push_back(q);
    }

    for (double alpha : {0.3, 0.5, 0.6, 0.9}) {
        auto result = expand_qualifiers(qs, table, alpha);
        std::set<std::string> got;
        for (const auto& e : result.enriched)
            if (e.origin != "seed") got.insert(e.phrase);

        std::set<std::string> want;  // oracle: full scan per qualifier
        for (const auto& q : qs) {
            const auto& qv = table.at(q.phrase);
            for (const auto& [term, v] : table.entries()) {
                if (term == "w0" || term == "w7" || term == "w33") continue;
                if (cosine(qv, v) >= alpha) want.insert(term);
            }
        }
        INFO("alpha " << alpha);
        CHECK(got == want);
    }
}

TEST_CASE("expansion at alpha 0.5 is a superset of expansion at alpha 0.6") {
    Rng rng(77);
    EmbeddingTable table(4);
    for (int i = 0; i < 50; ++i) {
        Vector v(4);
        for (auto& x : v) x = rng.uniform(-1.0, 1.0);
        table.insert("t" + std::to_string(i), std::move(v));
    }
    QualifierEntry q;
    q.phrase = "t1";
    q.cond_dir = Direction::Left;
    q.act_dir = Direction::Right;
    auto loose = phrases_of(expand_qualifiers({q}, table, 0.5).enriched);
    auto tight = phrases_of(expand_qualifiers({q}, table, 0.6).enriched);
    for (const auto& p : tight) CHECK(loose.count(p) == 1);
    CHECK(tight.size() <= loose.size());
}

TEST_CASE("a qualifier with no vector is skipped, not fatal") {
    EmbeddingTable table(2);
    table.insert("alpha", {1.0, 0.0});
    QualifierEntry q;
    q.phrase = "entirely unknown";
    q.cond_dir = Direction::Left;
    q.act_dir = Direction::Right;
    auto result = expand_qualifiers({q}, table, 0.5);
    REQUIRE(result.skipped.size() == 1);
    CHECK(result.skipped[0] == "entirely unknown");
    CHECK(result.enriched.size() == 1);  // just the original
}

TEST_CASE("multi-word qualifiers expand through their mean phrase vector") {
    EmbeddingTable table(2);
    table.insert("leads", {1.0, 0.0});
    table.insert("to", {0.0, 1.0});
    table.insert("causes", {0.7, 0.7});  // aligned with mean([1,0],[0,1])
    table.insert("banana", {-1.0, 0.0});
    QualifierEntry q;
    q.phrase = "leads to";
    q.cond_dir = Direction::Left;
    q.act_dir = Direction::Right;
    auto result = expand_qualifiers({q}, table, 0.9);
    auto phrases = phrases_of(result.enriched);
    CHECK(phrases.count("causes") == 1);
    CHECK(phrases.count("banana") == 0);
}

TEST_CASE("qualifier lexicon TSV round-trips") {
    std::vector<QualifierEntry> entries;
    QualifierEntry a;
    a.phrase = "leads to";
    a.weight = 235;
    a.cond_dir = Direction::Left;
    a.act_dir = Direction::Right;
    a.origin = "seed";
    QualifierEntry b;
    b.phrase = "mystery phrase";
    b.weight = 77.5;
    b.origin = "mined";  // inactive: no directions
    entries = {a, b};

    std::ostringstream out;
    save_qualifier_lexicon(entries, out);
    auto path = std::filesystem::temp_directory_path() / "cpgrules_qual_test.tsv";
    {
        std::ofstream f(path);
        f << out.str();
    }
    auto loaded = load_qualifier_lexicon(path.string());
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0].phrase == "leads to");
    CHECK(loaded[0].weight == 235);
    CHECK(loaded[0].cond_dir == Direction::Left);
    CHECK(loaded[0].act_dir == Direction::Right);
    CHECK(loaded[0].active());
    CHECK_FALSE(loaded[1].active());
    CHECK(loaded[1].origin == "mined");
    std::filesystem::remove(path);
}
