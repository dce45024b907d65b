#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "cpgrules/errors.hpp"
#include "cpgrules/evaluation.hpp"
#include "cpgrules/qualifier.hpp"
#include "cpgrules/rules.hpp"
#include "cpgrules/semantic_lexicon.hpp"
#include "cpgrules/text.hpp"

namespace cpgrules {

class EmptyPhrase : public Error {
public:
    explicit EmptyPhrase(const std::string& which)
        : Error("assigned " + which + " phrase has zero tokens") {}
};

// Lexical machinery for operator/value resolution: cue phrases mapped to
// comparison operators, the unit lexicon, negation and coordination words.
// Kept in a config file so domain experts can extend the cue list.
struct ExtractionConfig {
    // normalized cue tokens -> ASCII operator, longest phrases first
    std::vector<std::pair<std::vector<std::string>, std::string>> cues;
    std::map<std::string, std::string> units;  // normalized unit phrase -> display
    std::set<std::string> negation = {"not", "no"};
    std::set<std::string> coordination = {"or", "and"};
    int window = 2;

    // words that survive stop-word filtering because the cue/unit machinery
    // needs to see them
    std::set<std::string> retained_words;

    void add_cue(const std::string& phrase, const std::string& op) {
        std::vector<std::string> tokens;
        for (auto& w : str::split(str::lower(phrase), ' '))
            if (!w.empty()) tokens.push_back(w);
        if (tokens.empty()) return;
        cues.emplace_back(std::move(tokens), op);
    }

    void finalize() {
        std::sort(cues.begin(), cues.end(), [](const auto& a, const auto& b) {
            if (a.first.size() != b.first.size()) return a.first.size() > b.first.size();
            return a.first < b.first;
        });
        retained_words.clear();
        for (const auto& [tokens, _] : cues)
            for (const auto& w : tokens) retained_words.insert(w);
        for (const auto& [unit, _] : units)
            for (auto& w : str::split(unit, ' '))
                if (!w.empty()) retained_words.insert(w);
        for (const auto& w : negation) retained_words.insert(w);
        for (const auto& w : coordination) retained_words.insert(w);
    }

    static ExtractionConfig defaults() {
        ExtractionConfig cfg;
        for (const char* c : {"lower than", "less than", "below", "under", "lower", "less", "<",
                              "<"})
            cfg.add_cue(c, "<");
        for (const char* c :
             {"greater than", "higher than", "above", "over", "greater", "higher", ">"})
            cfg.add_cue(c, ">");
        for (const char* c : {"at least", "minimum", "no less than", "or older", "≥", ">="})
            cfg.add_cue(c, ">=");
        for (const char* c : {"at most", "maximum", "up to", "no more than", "≤", "<="})
            cfg.add_cue(c, "<=");
        cfg.add_cue("≠", "!=");
        cfg.add_cue("!=", "!=");
        cfg.add_cue("=", "=");
        cfg.add_cue("equal to", "=");
        cfg.add_cue("equals", "=");
        cfg.units = {{"mm hg", "mm Hg"}, {"mmhg", "mm Hg"},   {"%", "%"},
                     {"percent", "%"},   {"years", "years"},  {"year", "years"},
                     {"months", "months"}, {"month", "months"}, {"mg", "mg"},
                     {"mg/dl", "mg/dL"}, {"mmol/l", "mmol/L"}};
        cfg.finalize();
        return cfg;
    }

    static ExtractionConfig from_json(const nlohmann::json& j) {
        ExtractionConfig cfg;
        for (const auto& [op, phrases] : j.at("operator_cues").items())
            for (const auto& p : phrases) cfg.add_cue(p.get<std::string>(), op);
        if (j.contains("units"))
            for (const auto& [unit, display] : j.at("units").items())
                cfg.units[str::lower(unit)] = display.get<std::string>();
        if (j.contains("negation")) {
            cfg.negation.clear();
            for (const auto& w : j.at("negation")) cfg.negation.insert(str::lower(w.get<std::string>()));
        }
        if (j.contains("coordination")) {
            cfg.coordination.clear();
            for (const auto& w : j.at("coordination"))
                cfg.coordination.insert(str::lower(w.get<std::string>()));
        }
        cfg.window = j.value("window", 2);
        cfg.finalize();
        return cfg;
    }

    static ExtractionConfig from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open extraction config: " + path);
        nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
        if (j.is_discarded()) throw DataError("extraction config is not valid JSON: " + path);
        return from_json(j);
    }
};

struct QualifierMatch {
    const QualifierEntry* entry;
    size_t begin;  // token span [begin, end) over the sentence tokens
    size_t end;
};

// Longest qualifier phrase matching a contiguous normalized token span.
// Ties: higher weight, then leftmost, then phrase text for determinism.
inline std::optional<QualifierMatch> find_qualifier(const SentenceRecord& sentence,
                                                    const std::vector<QualifierEntry>& lexicon) {
    std::optional<QualifierMatch> best;
    auto better = [&](const QualifierMatch& a, const QualifierMatch& b) {
        size_t alen = a.end - a.begin, blen = b.end - b.begin;
        if (alen != blen) return alen > blen;
        if (a.entry->weight != b.entry->weight) return a.entry->weight > b.entry->weight;
        if (a.begin != b.begin) return a.begin < b.begin;
        return a.entry->phrase < b.entry->phrase;
    };
    const auto& toks = sentence.tokens;
    for (const auto& entry : lexicon) {
        if (!entry.active()) continue;
        auto phrase = entry.phrase_tokens();
        if (phrase.empty() || phrase.size() > toks.size()) continue;
        for (size_t i = 0; i + phrase.size() <= toks.size(); ++i) {
            bool match = true;
            for (size_t k = 0; k < phrase.size(); ++k) {
                if (toks[i + k].normalized != phrase[k]) {
                    match = false;
                    break;
                }
            }
            if (!match) continue;
            QualifierMatch cand{&entry, i, i + phrase.size()};
            if (!best || better(cand, *best)) best = cand;
        }
    }
    return best;
}

// Tokens strictly before and strictly after the matched span; the qualifier
// tokens belong to neither part.
inline std::pair<std::vector<Token>, std::vector<Token>> split_on_qualifier(
    const SentenceRecord& sentence, const QualifierMatch& match) {
    std::vector<Token> left(sentence.tokens.begin(),
                            sentence.tokens.begin() + static_cast<long>(match.begin));
    std::vector<Token> right(sentence.tokens.begin() + static_cast<long>(match.end),
                             sentence.tokens.end());
    return {std::move(left), std::move(right)};
}

struct PhraseAssignment {
    std::vector<Token> condition;
    std::vector<Token> action;
    // same-side cases leave the opposite side unclaimed; it still carries
    // action vocabulary ("... is recommended as initial therapy")
    std::vector<Token> trailing;
    bool low_confidence = false;
};

// Direction-driven condition/action assignment. Opposite directions map the
// two sides directly. Same-side qualifiers are split at the comma nearest
// the qualifier: the segment adjacent to the qualifier is the action phrase,
// the remainder the condition phrase. Without a comma the whole side is the
// condition, the opposite side the action, and the rule is flagged.
inline PhraseAssignment assign_phrases(const QualifierEntry& entry,
                                       const std::vector<Token>& sp_left,
                                       const std::vector<Token>& sp_right) {
    if (!entry.active()) throw Error("assign_phrases needs an active qualifier");
    PhraseAssignment out;
    Direction cond = *entry.cond_dir, act = *entry.act_dir;
    if (cond == Direction::Left && act == Direction::Right) {
        out.condition = sp_left;
        out.action = sp_right;
    } else if (cond == Direction::Right && act == Direction::Left) {
        out.condition = sp_right;
        out.action = sp_left;
    } else {
        const auto& shared = cond == Direction::Left ? sp_left : sp_right;
        const auto& opposite = cond == Direction::Left ? sp_right : sp_left;
        long comma = -1;
        if (cond == Direction::Left) {
            for (size_t i = 0; i < shared.size(); ++i)
                if (shared[i].normalized == ",") comma = static_cast<long>(i);  // last comma
        } else {
            for (size_t i = shared.size(); i-- > 0;)
                if (shared[i].normalized == ",") comma = static_cast<long>(i);  // first comma
        }
        if (comma >= 0) {
            std::vector<Token> before(shared.begin(), shared.begin() + comma);
            std::vector<Token> after(shared.begin() + comma + 1, shared.end());
            if (cond == Direction::Left) {
                out.condition = std::move(before);  // far segment
                out.action = std::move(after);      // adjacent to the qualifier
            } else {
                out.action = std::move(before);
                out.condition = std::move(after);
            }
            out.trailing = opposite;
        } else {
            out.condition = shared;
            out.action = opposite;
            out.low_confidence = true;
        }
    }
    if (out.condition.empty()) throw EmptyPhrase("condition");
    if (out.action.empty()) throw EmptyPhrase("action");
    return out;
}

namespace detail {

// The phrase as triple extraction sees it: punctuation and stop words
// dropped except for cue, unit, negation and coordination vocabulary.
inline std::vector<std::string> content_view(const std::vector<Token>& tokens,
                                             const StopwordList& stops,
                                             const ExtractionConfig& cfg) {
    std::vector<std::string> out;
    for (const auto& t : tokens) {
        const std::string& w = t.normalized;
        if (w.empty()) continue;
        bool retained = cfg.retained_words.count(w) > 0;
        bool numeric = str::is_ascii_digit(w[0]);
        if (!retained && !numeric) {
            if (t.pos == PosTag::Punct) continue;
            bool has_alnum = false;
            for (char ch : w)
                if (str::is_ascii_alpha(ch) || str::is_ascii_digit(ch)) has_alnum = true;
            if (!has_alnum) continue;
            if (stops.contains(w)) continue;
        }
        out.push_back(w);
    }
    return out;
}

// Cue phrase starting exactly at position i, longest first.
inline std::optional<std::pair<int, std::string>> cue_at(const std::vector<std::string>& words,
                                                         size_t i,
                                                         const ExtractionConfig& cfg) {
    for (const auto& [tokens, op] : cfg.cues) {
        if (i + tokens.size() > words.size()) continue;
        bool match = true;
        for (size_t k = 0; k < tokens.size(); ++k)
            if (words[i + k] != tokens[k]) {
                match = false;
                break;
            }
        if (match) return std::make_pair(static_cast<int>(tokens.size()), op);
    }
    return std::nullopt;
}

inline bool is_number(const std::string& w) {
    if (w.empty() || !str::is_ascii_digit(w[0])) return false;
    for (char c : w)
        if (!str::is_ascii_digit(c) && c != '.' && c != '/') return false;
    return true;
}

// Longest unit phrase starting at words[i] -> (token count, display form).
inline std::optional<std::pair<int, std::string>> unit_at(const std::vector<std::string>& words,
                                                          size_t i,
                                                          const ExtractionConfig& cfg) {
    std::optional<std::pair<int, std::string>> best;
    for (const auto& [unit, display] : cfg.units) {
        auto parts = str::split(unit, ' ');
        if (i + parts.size() > words.size()) continue;
        bool match = true;
        for (size_t k = 0; k < parts.size(); ++k)
            if (words[i + k] != parts[k]) {
                match = false;
                break;
            }
        if (match && (!best || static_cast<int>(parts.size()) > best->first))
            best = std::make_pair(static_cast<int>(parts.size()), display);
    }
    return best;
}

struct WindowScan {
    std::string op;          // resolved operator, empty if none
    std::string value;       // nearest number, empty if none
    std::string unit;        // display unit following the number
    bool negated = false;
};

// Looks through +-window content positions on each side of [begin, end).
// Cue phrases resolve the operator and are transparent for the value
// distance; the nearest number wins, right side breaking ties.
inline WindowScan scan_window(const std::vector<std::string>& words, size_t begin, size_t end,
                              const ExtractionConfig& cfg) {
    WindowScan out;
    int op_distance = cfg.window + 1;

    struct Found {
        int dist = 0;
        size_t pos = 0;
        bool ok = false;
    };
    Found right_num, left_num;

    // rightward
    {
        int steps = 0;
        size_t i = end;
        while (i < words.size() && steps < cfg.window) {
            if (auto cue = cue_at(words, i, cfg)) {
                if (out.op.empty() || steps + 1 < op_distance) {
                    out.op = cue->second;
                    op_distance = steps + 1;
                }
                i += static_cast<size_t>(cue->first);  // transparent for value distance
                continue;
            }
            if (cfg.negation.count(words[i])) out.negated = true;
            ++steps;
            if (is_number(words[i]) && !right_num.ok) right_num = {steps, i, true};
            ++i;
        }
    }
    // leftward
    {
        int steps = 0;
        size_t i = begin;
        while (i > 0 && steps < cfg.window) {
            --i;
            // cue phrases read left to right; check whether a cue ends here
            bool in_cue = false;
            for (const auto& [tokens, op] : cfg.cues) {
                if (tokens.size() > i + 1) continue;
                size_t start = i + 1 - tokens.size();
                bool match = true;
                for (size_t k = 0; k < tokens.size(); ++k)
                    if (words[start + k] != tokens[k]) {
                        match = false;
                        break;
                    }
                if (match) {
                    if (out.op.empty() || steps + 1 < op_distance) {
                        out.op = op;
                        op_distance = steps + 1;
                    }
                    i = start;  // skip over the cue without consuming a step
                    in_cue = true;
                    break;
                }
            }
            if (in_cue) continue;
            if (cfg.negation.count(words[i])) out.negated = true;
            ++steps;
            if (is_number(words[i]) && !left_num.ok) left_num = {steps, i, true};
        }
    }

    const Found* pick = nullptr;
    if (right_num.ok && left_num.ok)
        pick = right_num.dist <= left_num.dist ? &right_num : &left_num;  // tie: right
    else if (right_num.ok)
        pick = &right_num;
    else if (left_num.ok)
        pick = &left_num;
    if (pick) {
        out.value = words[pick->pos];
        if (auto unit = unit_at(words, pick->pos + 1, cfg)) out.unit = unit->second;
    }
    return out;
}

}  // namespace detail

// Lexical operator resolution over a context window (the reconstruction of
// the paper's unprinted findTokenOperator): cue map lookup, else "=".
inline std::string find_token_operator(const std::vector<std::string>& context_words,
                                       const ExtractionConfig& cfg = ExtractionConfig::defaults()) {
    for (size_t i = 0; i < context_words.size(); ++i)
        if (auto cue = detail::cue_at(context_words, i, cfg)) return cue->second;
    return "=";
}

// Extracts <Key, Operator, Value> triples from a condition phrase: every
// longest-match span whose semantic type is in the given category set
// becomes a key; operator and value come from the +-window scan. Keys with
// no resolvable value default to = Yes.
inline std::vector<ConditionTriple> extract_triples(const std::vector<Token>& phrase,
                                                    const SemanticLexicon& lexicon,
                                                    const std::set<std::string>& categories,
                                                    const CategoryConfig& config,
                                                    const ExtractionConfig& extraction,
                                                    const StopwordList& stops) {
    auto words = detail::content_view(phrase, stops, extraction);
    std::vector<ConditionTriple> out;
    size_t i = 0;
    while (i < words.size()) {
        auto match = lexicon.match_at(words, i);
        if (!match || !categories.count(match->type)) {
            ++i;
            continue;
        }
        size_t begin = i, end = i + static_cast<size_t>(match->length);
        auto scan = detail::scan_window(words, begin, end, extraction);
        ConditionTriple t;
        t.key_token_begin = static_cast<int>(begin);
        t.key_token_end = static_cast<int>(end);
        switch (config.policy_of(match->type)) {
            case ValuePolicy::Categorical:
                t.key = CategoryConfig::display_name(match->type);
                t.op = scan.negated ? "!=" : "=";
                t.value = match->term;
                break;
            case ValuePolicy::Numeric:
                if (!scan.value.empty()) {
                    t.key = match->term;
                    t.op = scan.op.empty() ? "=" : scan.op;
                    t.value = scan.value;
                    t.unit = scan.unit;
                    break;
                }
                [[fallthrough]];  // no number in the window: boolean default
            case ValuePolicy::Boolean:
            default:
                t.key = match->term;
                t.op = "=";
                t.value = scan.negated ? "No" : "Yes";
                break;
        }
        out.push_back(std::move(t));
        i = end;
    }
    return out;
}

// Action extraction: collect action-typed spans in order, group coordinated
// value spans ("A or B") into one disjunction, pair slot spans with their
// nearest value group, and resolve numeric spans through the window scan.
inline std::vector<RuleAction> extract_action(const std::vector<Token>& phrase,
                                              const SemanticLexicon& lexicon,
                                              const CategoryConfig& config,
                                              const ExtractionConfig& extraction,
                                              const StopwordList& stops) {
    auto words = detail::content_view(phrase, stops, extraction);

    struct Span {
        size_t begin, end;
        std::string term, type;
        ValuePolicy policy;
    };
    std::vector<Span> spans;
    size_t i = 0;
    while (i < words.size()) {
        auto match = lexicon.match_at(words, i);
        if (!match || !config.action_categories.count(match->type)) {
            ++i;
            continue;
        }
        spans.push_back({i, i + static_cast<size_t>(match->length), match->term, match->type,
                         config.policy_of(match->type)});
        i = spans.back().end;
    }
    if (spans.empty()) return {};

    // group adjacent value spans linked only by coordination words
    struct Group {
        std::vector<const Span*> members;
        size_t begin, end;
    };
    std::vector<Group> groups;
    std::vector<const Span*> others;
    for (const auto& span : spans) {
        if (span.policy != ValuePolicy::Value) {
            others.push_back(&span);
            continue;
        }
        bool merged = false;
        if (!groups.empty()) {
            auto& last = groups.back();
            bool only_coordination = true;
            for (size_t k = last.end; k < span.begin; ++k)
                if (!extraction.coordination.count(words[k])) only_coordination = false;
            if (only_coordination && last.end <= span.begin) {
                last.members.push_back(&span);
                last.end = span.end;
                merged = true;
            }
        }
        if (!merged) groups.push_back({{&span}, span.begin, span.end});
    }

    std::vector<bool> group_used(groups.size(), false);
    auto group_value = [&](const Group& g) {
        std::vector<std::string> parts;
        for (const auto* m : g.members) parts.push_back(m->term);
        return str::join(parts, " OR ");
    };

    std::vector<RuleAction> out;
    for (const auto* span : others) {
        RuleAction a;
        a.key_token_begin = static_cast<int>(span->begin);
        a.key_token_end = static_cast<int>(span->end);
        if (span->policy == ValuePolicy::Slot) {
            // nearest unused value group
            long best = -1;
            size_t best_dist = SIZE_MAX;
            for (size_t g = 0; g < groups.size(); ++g) {
                if (group_used[g]) continue;
                size_t dist = groups[g].end <= span->begin ? span->begin - groups[g].end
                                                           : groups[g].begin - span->end;
                if (dist < best_dist) {
                    best_dist = dist;
                    best = static_cast<long>(g);
                }
            }
            a.key = span->term;
            if (best >= 0) {
                group_used[static_cast<size_t>(best)] = true;
                a.op = "=";
                a.value = group_value(groups[static_cast<size_t>(best)]);
            } else {
                a.op.clear();  // bare slot
            }
        } else if (span->policy == ValuePolicy::Numeric) {
            auto scan = detail::scan_window(words, span->begin, span->end, extraction);
            a.key = span->term;
            if (!scan.value.empty()) {
                a.op = scan.op.empty() ? "=" : scan.op;
                a.value = scan.value;
                a.unit = scan.unit;
            } else {
                a.op.clear();  // bare
            }
        } else {  // Bare, or condition-style policies showing up on the action side
            a.key = span->term;
            a.op.clear();
        }
        out.push_back(std::move(a));
    }
    for (size_t g = 0; g < groups.size(); ++g) {
        if (group_used[g]) continue;
        RuleAction a;
        a.key = group_value(groups[g]);
        a.op.clear();
        a.key_token_begin = static_cast<int>(groups[g].begin);
        a.key_token_end = static_cast<int>(groups[g].end);
        out.push_back(std::move(a));
    }
    // keep document order by span position
    std::sort(out.begin(), out.end(), [](const RuleAction& a, const RuleAction& b) {
        return a.key_token_begin < b.key_token_begin;
    });
    return out;
}

struct SkipRecord {
    std::string doc_id;
    int sent_index = 0;
    std::string reason;
};

struct ExtractionOutput {
    std::vector<Rule> rules;
    std::vector<SkipRecord> skips;
};

struct ExtractorResources {
    std::vector<QualifierEntry> qualifiers;
    SemanticLexicon lexicon;
    CategoryConfig categories;
    ExtractionConfig extraction = ExtractionConfig::defaults();
    StopwordList stop_words;
    SynonymMap synonyms;
};

// Algorithm-1 pipeline over classified sentences: keep C-A/C-C/A, locate the
// best qualifier, split and assign phrases, extract condition triples and
// actions, and assemble rules. Per-sentence failures become skip records,
// never aborting the document.
inline ExtractionOutput extract_rules(
    const std::vector<SentenceRecord>& sentences,
    const std::function<SentenceClass(const SentenceRecord&)>& classify,
    const ExtractorResources& res) {
    ExtractionOutput out;
    for (const auto& sentence : sentences) {
        auto skip = [&](const std::string& reason) {
            out.skips.push_back({sentence.doc_id, sentence.sent_index, reason});
        };
        if (sentence.tokens.empty()) {
            skip("empty-sentence");
            continue;
        }
        SentenceClass cls = classify(sentence);
        if (cls == SentenceClass::NotApplicable) {
            skip("class-NA");
            continue;
        }

        Rule rule;
        rule.doc_id = sentence.doc_id;
        rule.sent_index = sentence.sent_index;
        rule.sentence_class = cls;

        if (cls == SentenceClass::Action) {
            // no explicit condition; the context placeholder marks it for review
            rule.needs_context = true;
            ConditionTriple placeholder;
            placeholder.key = "context";
            placeholder.op = "=";
            placeholder.value = "unresolved";
            rule.conditions.push_back(std::move(placeholder));
            rule.actions = extract_action(sentence.tokens, res.lexicon, res.categories,
                                          res.extraction, res.stop_words);
            if (rule.actions.empty()) {
                skip("no-action");
                continue;
            }
        } else {
            auto match = find_qualifier(sentence, res.qualifiers);
            if (!match) {
                skip("no-qualifier");
                continue;
            }
            auto [sp_left, sp_right] = split_on_qualifier(sentence, *match);
            PhraseAssignment assignment;
            try {
                assignment = assign_phrases(*match->entry, sp_left, sp_right);
            } catch (const EmptyPhrase&) {
                skip("empty-phrase");
                continue;
            }
            rule.low_confidence = assignment.low_confidence;
            rule.consequence = cls == SentenceClass::ConditionConsequence;

            rule.conditions =
                extract_triples(assignment.condition, res.lexicon,
                                res.categories.condition_categories, res.categories,
                                res.extraction, res.stop_words);
            if (rule.conditions.empty()) {
                skip("no-condition");
                continue;
            }
            std::vector<Token> action_tokens = assignment.action;
            action_tokens.insert(action_tokens.end(), assignment.trailing.begin(),
                                 assignment.trailing.end());
            rule.actions = extract_action(action_tokens, res.lexicon, res.categories,
                                          res.extraction, res.stop_words);
            if (rule.actions.empty()) {
                skip("no-action");
                continue;
            }
        }
        rule.rendered = render_canonical(canonicalize(rule, res.synonyms));
        out.rules.push_back(std::move(rule));
    }
    return out;
}

inline void save_skip_report(const std::vector<SkipRecord>& skips, std::ostream& out) {
    for (const auto& s : skips) {
        nlohmann::json j;
        j["doc"] = s.doc_id;
        j["sent"] = s.sent_index;
        j["reason"] = s.reason;
        out << j.dump() << "\n";
    }
}

}  // namespace cpgrules
