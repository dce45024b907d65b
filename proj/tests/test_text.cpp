#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <string>
#include <vector>

#include "cpgrules/corpus_io.hpp"
#include "cpgrules/pos_tagger.hpp"
#include "cpgrules/porter.hpp"
#include "cpgrules/text.hpp"

using namespace cpgrules;

namespace {

const std::string kDataDir = CPGRULES_DATA_DIR;

std::vector<std::string> normalized_of(const SentenceRecord& s) {
    std::vector<std::string> out;
    for (const auto& t : s.tokens) out.push_back(t.normalized);
    return out;
}

SentenceRecord make_sentence(const std::string& raw) {
    SentenceRecord s;
    s.doc_id = "t";
    s.raw = raw;
    tokenize(s);
    return s;
}

}  // namespace

TEST_CASE("empty document yields no sentences") {
    CHECK(split_sentences({"d", ""}).empty());
    CHECK(split_sentences({"d", "   \n\t "}).empty());
}

TEST_CASE("terminal punctuation followed by capital splits sentences") {
    auto sents = split_sentences({"d", "BP is high. Treat now."});
    REQUIRE(sents.size() == 2);
    CHECK(sents[0].raw == "BP is high.");
    CHECK(sents[1].raw == "Treat now.");
    CHECK(sents[0].sent_index == 0);
    CHECK(sents[1].sent_index == 1);
}

TEST_CASE("decimal points and unit abbreviations do not split") {
    auto sents = split_sentences({"d", "SBP was 140.5 mm Hg."});
    REQUIRE(sents.size() == 1);
    CHECK(sents[0].raw == "SBP was 140.5 mm Hg.");

    sents = split_sentences({"d", "Useful drugs (e.g. diuretics) exist. Use them."});
    REQUIRE(sents.size() == 2);
}

TEST_CASE("question and exclamation marks terminate sentences") {
    auto sents = split_sentences({"d", "Is BP high? Yes! Then treat."});
    REQUIRE(sents.size() == 3);
    CHECK(sents[1].raw == "Yes!");
}

TEST_CASE("splitting partitions the document byte-for-byte") {
    const std::vector<std::string> docs = {
        "BP is high. Treat now.",
        "  Leading space. Mid sentence\nwith newline. 140.5 is not a boundary. Trailing",
        "One sentence without terminator",
        "Numbers. 42 starts a sentence. e.g. not here. Final!  ",
        "A. B. C.",
    };
    for (const auto& text : docs) {
        auto sents = split_sentences({"d", text});
        std::string rebuilt;
        size_t cursor = 0;
        for (const auto& s : sents) {
            rebuilt += text.substr(cursor, s.begin - cursor);  // inter-sentence whitespace
            rebuilt += s.raw;
            CHECK(text.substr(s.begin, s.end - s.begin) == s.raw);
            cursor = s.end;
        }
        rebuilt += text.substr(cursor);
        CHECK(rebuilt == text);
        for (size_t i = 1; i < sents.size(); ++i)
            CHECK(sents[i].sent_index == sents[i - 1].sent_index + 1);
    }
}

TEST_CASE("tokenize lowercases surfaces into normalized forms") {
    auto s = make_sentence("Treatment with drugs");
    REQUIRE(s.tokens.size() == 3);
    CHECK(s.tokens[0].surface == "Treatment");
    CHECK(s.tokens[1].surface == "with");
    CHECK(s.tokens[2].surface == "drugs");
    CHECK(normalized_of(s) == std::vector<std::string>{"treatment", "with", "drugs"});
    for (const auto& t : s.tokens) CHECK(t.normalized == str::lower(t.surface));
}

TEST_CASE("tokenizer keeps compound values and symbols whole") {
    auto s = make_sentence("BP goal < 150/90 mm Hg (confirmed), SBP ≥ 140.5");
    auto norm = normalized_of(s);
    CHECK(std::find(norm.begin(), norm.end(), "150/90") != norm.end());
    CHECK(std::find(norm.begin(), norm.end(), "140.5") != norm.end());
    CHECK(std::find(norm.begin(), norm.end(), "<") != norm.end());
    CHECK(std::find(norm.begin(), norm.end(), "≥") != norm.end());
    CHECK(std::find(norm.begin(), norm.end(), ",") != norm.end());
    CHECK(std::find(norm.begin(), norm.end(), "(") != norm.end());
    // surfaces at recorded offsets reassemble the raw text
    for (const auto& t : s.tokens)
        CHECK(s.raw.substr(t.offset, t.surface.size()) == t.surface);
}

TEST_CASE("stop-word removal drops listed words and reindexes") {
    StopwordList stops{"the"};
    SentenceRecord s;
    s.raw = "the panel decide";
    tokenize(s, {.remove_stop_words = true}, stops);
    CHECK(normalized_of(s) == std::vector<std::string>{"panel", "decide"});
    CHECK(s.tokens[0].index == 0);
    CHECK(s.tokens[1].index == 1);
}

TEST_CASE("stop-word filtering never removes a token absent from the list") {
    StopwordList stops{"the", "of", "is"};
    auto full = make_sentence("Measurement of the blood pressure is needed today");
    SentenceRecord filtered;
    filtered.raw = full.raw;
    tokenize(filtered, {.remove_stop_words = true}, stops);
    for (const auto& t : filtered.tokens) CHECK_FALSE(stops.contains(t.normalized));
    // every kept token appeared in the unfiltered stream
    auto all = normalized_of(full);
    for (const auto& t : filtered.tokens)
        CHECK(std::find(all.begin(), all.end(), t.normalized) != all.end());
}

TEST_CASE("tokenization is idempotent on an already-normalized stream") {
    for (const std::string raw :
         {"The panel also recognizes that an SBP goal is recommended",
          "BP goal < 150/90 mm Hg , including those with diabetes"}) {
        auto first = make_sentence(raw);
        std::string flattened = str::join(normalized_of(first), " ");
        auto second = make_sentence(flattened);
        CHECK(normalized_of(second) == normalized_of(first));
    }
}

TEST_CASE("porter stemmer matches traced golden outputs") {
    PorterStemmer stemmer;
    // Golden values derived by tracing the published algorithm by hand.
    const std::map<std::string, std::string> golden = {
        {"caresses", "caress"},   {"ponies", "poni"},         {"ties", "ti"},
        {"caress", "caress"},     {"cats", "cat"},            {"feed", "feed"},
        {"agreed", "agre"},       {"plastered", "plaster"},   {"bled", "bled"},
        {"motoring", "motor"},    {"sing", "sing"},           {"conflated", "conflat"},
        {"troubled", "troubl"},   {"sized", "size"},          {"hopping", "hop"},
        {"tanned", "tan"},        {"falling", "fall"},        {"hissing", "hiss"},
        {"fizzed", "fizz"},       {"failing", "fail"},        {"filing", "file"},
        {"happy", "happi"},       {"sky", "sky"},             {"relational", "relat"},
        {"conditional", "condit"},{"rational", "ration"},     {"valenci", "valenc"},
        {"hesitanci", "hesit"},   {"digitizer", "digit"},     {"conformabli", "conform"},
        {"radicalli", "radic"},   {"differentli", "differ"},  {"vileli", "vile"},
        {"analogousli", "analog"},{"vietnamization", "vietnam"}, {"predication", "predic"},
        {"operator", "oper"},     {"feudalism", "feudal"},    {"decisiveness", "decis"},
        {"hopefulness", "hope"},  {"callousness", "callous"}, {"formaliti", "formal"},
        {"sensitiviti", "sensit"},{"sensibiliti", "sensibl"}, {"triplicate", "triplic"},
        {"formative", "form"},    {"formalize", "formal"},    {"electriciti", "electr"},
        {"electrical", "electr"}, {"hopeful", "hope"},        {"goodness", "good"},
        {"revival", "reviv"},     {"allowance", "allow"},     {"inference", "infer"},
        {"airliner", "airlin"},   {"gyroscopic", "gyroscop"}, {"adjustable", "adjust"},
        {"defensible", "defens"}, {"irritant", "irrit"},      {"replacement", "replac"},
        {"adjustment", "adjust"}, {"dependent", "depend"},    {"adoption", "adopt"},
        {"communism", "commun"},  {"activate", "activ"},      {"angulariti", "angular"},
        {"homologous", "homolog"},{"effective", "effect"},    {"bowdlerize", "bowdler"},
        {"probate", "probat"},    {"rate", "rate"},           {"cease", "ceas"},
        {"controll", "control"},  {"roll", "roll"},           {"improvements", "improv"},
        {"recommended", "recommend"}, {"treatment", "treatment"}, {"diabetes", "diabet"},
        {"hypertension", "hypertens"},
    };
    for (const auto& [word, want] : golden) {
        INFO(word);
        CHECK(stemmer.stem(word) == want);
    }
    // Non-letter and very short tokens pass through untouched.
    CHECK(stemmer.stem("150/90") == "150/90");
    CHECK(stemmer.stem("bp") == "bp");
    CHECK(stemmer.stem("") == "");
}

TEST_CASE("tokenize with stemming records stems") {
    SentenceRecord s;
    s.raw = "improvements in outcomes";
    tokenize(s, {.stemming = true});
    CHECK(s.tokens[0].stem == "improv");
}

TEST_CASE("pos tagging: lexicon, digit rule and noun fallback") {
    auto tagger = PosTagger::from_file(kDataDir + "/tag_lexicon.tsv");
    REQUIRE(tagger.size() > 100);
    auto s = make_sentence("recommended 130 hg quickly , ≥");
    tagger.tag_sentence(s);
    CHECK(s.tokens[0].pos == PosTag::Verb);   // lexicon
    CHECK(s.tokens[1].pos == PosTag::Num);    // digit rule
    CHECK(s.tokens[2].pos == PosTag::Noun);   // unknown-word fallback
    CHECK(s.tokens[3].pos == PosTag::Adv);    // -ly suffix rule
    CHECK(s.tokens[4].pos == PosTag::Punct);
    for (const auto& t : s.tokens) {
        CHECK(static_cast<int>(t.pos) >= 0);
        CHECK(static_cast<int>(t.pos) < kTagsetSize);
    }
}

TEST_CASE("suffix rules tag unknown -ed and -ing words as verbs") {
    PosTagger empty_tagger;
    auto s = make_sentence("zorbed zorbing 150/90");
    empty_tagger.tag_sentence(s);
    CHECK(s.tokens[0].pos == PosTag::Verb);
    CHECK(s.tokens[1].pos == PosTag::Verb);
    CHECK(s.tokens[2].pos == PosTag::Num);
}

TEST_CASE("bigrams are adjacent normalized pairs") {
    SentenceRecord s = make_sentence("leads to death");
    CHECK(bigrams(s) == std::vector<std::string>{"leads to", "to death"});

    SentenceRecord single = make_sentence("single");
    CHECK(bigrams(single).empty());

    SentenceRecord mined = make_sentence("Treatment with X is needed");
    auto bg = bigrams(mined);
    CHECK(std::find(bg.begin(), bg.end(), "treatment with") != bg.end());
    CHECK(std::find(bg.begin(), bg.end(), "is needed") != bg.end());
}

TEST_CASE("bigram count is token count minus one") {
    for (const std::string raw : {"a b", "alpha beta gamma delta", "one two three, four"}) {
        auto s = make_sentence(raw);
        REQUIRE(s.tokens.size() >= 2);
        CHECK(bigrams(s).size() == s.tokens.size() - 1);
    }
}

TEST_CASE("annotated corpus round-trips through JSONL") {
    auto path = std::filesystem::temp_directory_path() / "cpgrules_corpus_test.jsonl";
    {
        std::ofstream out(path);
        out << R"({"id":"g1","sent_index":0,"text":"BP is high.","label":"C-A"})" << "\n";
        out << R"({"id":"g1","sent_index":1,"text":"Background prose.","label":"NA"})" << "\n";
        out << R"({"id":"g1","sent_index":2,"text":"Unlabeled.","label":null})" << "\n";
    }
    auto corpus = load_annotated_corpus(path.string());
    REQUIRE(corpus.size() == 3);
    CHECK(corpus[0].label == SentenceClass::ConditionAction);
    CHECK(corpus[1].label == SentenceClass::NotApplicable);
    CHECK_FALSE(corpus[2].label.has_value());
    std::filesystem::remove(path);
}

TEST_CASE("unknown labels are rejected") {
    CHECK_THROWS_AS(class_from_name("C-X"), DataError);
    CHECK(class_from_name("C-C") == SentenceClass::ConditionConsequence);
}
