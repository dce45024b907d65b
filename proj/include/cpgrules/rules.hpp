#pragma once

#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cpgrules/errors.hpp"
#include "cpgrules/strings.hpp"
#include "cpgrules/text_types.hpp"

namespace cpgrules {

// One <Key, Operator, Value> unit. Operators use the ASCII spellings
// "=", "<", ">", "<=", ">=", "!=" internally and pretty-print as unicode.
struct ConditionTriple {
    std::string key;
    std::string op = "=";
    std::string value;
    std::string unit;  // adjacent unit text ("mm Hg"), appended on render
    int key_token_begin = -1;  // span in the source sentence, when extracted
    int key_token_end = -1;
};

// Actions share the triple shape; a bare action has only `key` set.
using RuleAction = ConditionTriple;

struct Rule {
    std::vector<ConditionTriple> conditions;  // AND semantics
    std::vector<RuleAction> actions;
    std::string doc_id;
    int sent_index = 0;
    SentenceClass sentence_class = SentenceClass::ConditionAction;
    bool low_confidence = false;  // same-side qualifier without a comma
    bool needs_context = false;   // A-class sentence: condition unresolved
    bool consequence = false;     // C-C sentence: consequence in the THEN slot
    std::string rendered;         // canonical plain-rule text
};

inline std::string pretty_operator(const std::string& op) {
    if (op == "<=") return "≤";
    if (op == ">=") return "≥";
    if (op == "!=") return "≠";
    return op;
}

inline std::optional<std::string> ascii_operator(const std::string& text) {
    if (text == "=" || text == "<" || text == ">" || text == "<=" || text == ">=" ||
        text == "!=")
        return text;
    if (text == "≤") return "<=";
    if (text == "≥") return ">=";
    if (text == "≠") return "!=";
    if (text == "==") return "=";
    return std::nullopt;
}

inline std::string render_triple(const ConditionTriple& t) {
    std::string out = t.key;
    if (!t.value.empty() || !t.op.empty()) {
        out += " " + pretty_operator(t.op.empty() ? "=" : t.op) + " " + t.value;
        if (!t.unit.empty()) out += " " + t.unit;
    }
    return out;
}

// Plain rendering in stored order: IF c1 AND c2 THEN a1 AND a2.
inline std::string render_rule(const Rule& rule) {
    std::vector<std::string> conds, acts;
    for (const auto& c : rule.conditions) conds.push_back(render_triple(c));
    for (const auto& a : rule.actions) acts.push_back(render_triple(a));
    return "IF " + str::join(conds, " AND ") + " THEN " + str::join(acts, " AND ");
}

namespace detail {

// Finds the first comparison operator in a condition string, preferring
// multi-character spellings. Operators are matched as standalone tokens so
// hyphens and slashes in terms are never split.
inline std::optional<std::pair<size_t, std::string>> find_operator(const std::string& text) {
    static const std::vector<std::string> ops = {"<=", ">=", "!=", "==",   "≤",
                                                 "≥", "≠", "=", "<", ">"};
    size_t best_pos = std::string::npos;
    std::string best_op;
    for (const auto& op : ops) {
        size_t pos = text.find(" " + op + " ");
        if (pos != std::string::npos && pos < best_pos) {
            best_pos = pos;
            best_op = op;
        }
    }
    if (best_pos == std::string::npos) return std::nullopt;
    return std::make_pair(best_pos, best_op);
}

}  // namespace detail

// Parses the constrained plain-text grammar
//   IF key op value [AND ...] THEN action [AND ...]
// used for expert rule sets.
inline Rule parse_rule_text(const std::string& line) {
    std::string text = str::trim(line);
    if (!str::starts_with(text, "IF "))
        throw DataError("rule must start with 'IF ': " + line);
    text = text.substr(3);
    size_t then_pos = text.find(" THEN ");
    if (then_pos == std::string::npos) throw DataError("rule is missing ' THEN ': " + line);

    Rule rule;
    for (const auto& part : str::split(std::string_view(text).substr(0, then_pos), " AND ")) {
        std::string cond = str::trim(part);
        if (cond.empty()) throw DataError("empty condition in rule: " + line);
        auto op = detail::find_operator(cond);
        if (!op) throw DataError("condition has no operator: " + cond);
        ConditionTriple t;
        t.key = str::trim(cond.substr(0, op->first));
        t.op = *ascii_operator(op->second);
        t.value = str::trim(cond.substr(op->first + op->second.size() + 2));
        rule.conditions.push_back(std::move(t));
    }
    for (const auto& part :
         str::split(std::string_view(text).substr(then_pos + 6), " AND ")) {
        std::string act = str::trim(part);
        if (act.empty()) throw DataError("empty action in rule: " + line);
        RuleAction a;
        if (auto op = detail::find_operator(act)) {
            a.key = str::trim(act.substr(0, op->first));
            a.op = *ascii_operator(op->second);
            a.value = str::trim(act.substr(op->first + op->second.size() + 2));
        } else {
            a.key = act;
            a.op.clear();
        }
        rule.actions.push_back(std::move(a));
    }
    if (rule.conditions.empty() || rule.actions.empty())
        throw DataError("rule needs at least one condition and one action: " + line);
    return rule;
}

inline nlohmann::json triple_to_json(const ConditionTriple& t) {
    nlohmann::json j;
    j["key"] = t.key;
    j["op"] = t.op;
    j["value"] = t.value;
    j["unit"] = t.unit;
    return j;
}

inline ConditionTriple triple_from_json(const nlohmann::json& j) {
    ConditionTriple t;
    t.key = j.value("key", std::string());
    t.op = j.value("op", std::string());
    t.value = j.value("value", std::string());
    t.unit = j.value("unit", std::string());
    return t;
}

inline nlohmann::json rule_to_json(const Rule& rule) {
    nlohmann::json j;
    j["conditions"] = nlohmann::json::array();
    for (const auto& c : rule.conditions) j["conditions"].push_back(triple_to_json(c));
    j["actions"] = nlohmann::json::array();
    for (const auto& a : rule.actions) j["actions"].push_back(triple_to_json(a));
    j["source"] = {{"doc", rule.doc_id}, {"sent", rule.sent_index}};
    j["class"] = class_name(rule.sentence_class);
    j["confidence"] = rule.low_confidence ? "low" : "normal";
    auto flags = nlohmann::json::array();
    if (rule.needs_context) flags.push_back("needs-context");
    if (rule.consequence) flags.push_back("consequence");
    j["flags"] = flags;
    j["rendered"] = rule.rendered;
    return j;
}

inline Rule rule_from_json(const nlohmann::json& j) {
    Rule rule;
    for (const auto& c : j.value("conditions", nlohmann::json::array()))
        rule.conditions.push_back(triple_from_json(c));
    for (const auto& a : j.value("actions", nlohmann::json::array()))
        rule.actions.push_back(triple_from_json(a));
    if (j.contains("source")) {
        rule.doc_id = j["source"].value("doc", std::string());
        rule.sent_index = j["source"].value("sent", 0);
    }
    if (j.contains("class")) rule.sentence_class = class_from_name(j["class"].get<std::string>());
    rule.low_confidence = j.value("confidence", std::string("normal")) == "low";
    for (const auto& f : j.value("flags", nlohmann::json::array())) {
        if (f == "needs-context") rule.needs_context = true;
        if (f == "consequence") rule.consequence = true;
    }
    rule.rendered = j.value("rendered", std::string());
    return rule;
}

inline void save_rules_jsonl(const std::vector<Rule>& rules, std::ostream& out) {
    for (const auto& r : rules) out << rule_to_json(r).dump() << "\n";
}

inline void save_rules_rendered(const std::vector<Rule>& rules, std::ostream& out) {
    for (const auto& r : rules) out << (r.rendered.empty() ? render_rule(r) : r.rendered) << "\n";
}

// Reads either extraction JSONL or the plain-text grammar, sniffing the
// first non-blank character.
inline std::vector<Rule> load_rules(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open rule file: " + path);
    std::vector<Rule> rules;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = str::trim(line);
        if (t.empty() || t[0] == '#') continue;
        try {
            if (t[0] == '{') {
                nlohmann::json j = nlohmann::json::parse(t);
                rules.push_back(rule_from_json(j));
            } else {
                rules.push_back(parse_rule_text(t));
            }
        } catch (const nlohmann::json::exception& e) {
            throw DataError("bad rule at " + path + ":" + std::to_string(line_no) + ": " +
                            e.what());
        } catch (const DataError& e) {
            throw DataError("bad rule at " + path + ":" + std::to_string(line_no) + ": " +
                            e.what());
        }
    }
    return rules;
}

}  // namespace cpgrules
