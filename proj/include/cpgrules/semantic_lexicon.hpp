#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "cpgrules/errors.hpp"
#include "cpgrules/strings.hpp"

namespace cpgrules {

// Term -> semantic type dictionary standing in for the licensed UMLS
// semantic categories. Terms are normalized uni/bi/tri-grams; lookup is
// longest-match.
class SemanticLexicon {
public:
    SemanticLexicon() = default;

    // TSV: term<TAB>semantic_type. '#' comments and blank lines skipped.
    static SemanticLexicon from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open semantic lexicon: " + path);
        SemanticLexicon lex;
        std::string line;
        size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty() || line[0] == '#') continue;
            auto tab = line.find('\t');
            if (tab == std::string::npos)
                throw DataError("semantic lexicon line " + std::to_string(line_no) +
                                ": expected term<TAB>type");
            lex.insert(line.substr(0, tab), str::trim(line.substr(tab + 1)));
        }
        return lex;
    }

    void insert(const std::string& term, const std::string& type) {
        std::string norm = str::lower(str::trim(term));
        int words = 1;
        for (char c : norm)
            if (c == ' ') ++words;
        if (words > 3) throw DataError("semantic lexicon terms are at most trigrams: " + term);
        max_len_ = std::max(max_len_, words);
        entries_[norm] = type;
    }

    size_t size() const { return entries_.size(); }

    const std::string* type_of(const std::string& normalized_term) const {
        auto it = entries_.find(normalized_term);
        return it == entries_.end() ? nullptr : &it->second;
    }

    struct Match {
        int length;        // matched tokens
        std::string term;  // normalized matched phrase
        std::string type;
    };

    // Longest match starting at tokens[i]; "calcium channel blocker" wins
    // over "calcium" whenever all three tokens are present.
    std::optional<Match> match_at(const std::vector<std::string>& tokens, size_t i) const {
        int longest = std::min<int>(max_len_, static_cast<int>(tokens.size() - i));
        for (int len = longest; len >= 1; --len) {
            std::string phrase = tokens[i];
            for (int k = 1; k < len; ++k) phrase += " " + tokens[i + static_cast<size_t>(k)];
            if (auto it = entries_.find(phrase); it != entries_.end())
                return Match{len, phrase, it->second};
        }
        return std::nullopt;
    }

private:
    std::unordered_map<std::string, std::string> entries_;
    int max_len_ = 1;
};

// How a semantic type turns into a <Key, Operator, Value> triple.
enum class ValuePolicy {
    Categorical,  // key = type display name, value = the matched term
    Boolean,      // key = term, value = Yes/No
    Numeric,      // key = term, operator/value from the context window
    Slot,         // action key paired with a coordinated value group
    Value,        // action term that fills a slot (or stands alone)
    Bare,         // action term emitted as-is
};

inline ValuePolicy value_policy_from_name(const std::string& name) {
    auto n = str::lower(name);
    if (n == "categorical") return ValuePolicy::Categorical;
    if (n == "boolean") return ValuePolicy::Boolean;
    if (n == "numeric") return ValuePolicy::Numeric;
    if (n == "slot") return ValuePolicy::Slot;
    if (n == "value") return ValuePolicy::Value;
    if (n == "bare") return ValuePolicy::Bare;
    throw DataError("unknown value policy: " + name);
}

struct CategoryConfig {
    std::set<std::string> condition_categories;
    std::set<std::string> action_categories;
    std::map<std::string, ValuePolicy> policies;
    bool allow_overlap = false;

    void validate() const {
        if (condition_categories.empty()) throw ConfigError("condition_categories is empty");
        if (action_categories.empty()) throw ConfigError("action_categories is empty");
        if (!allow_overlap) {
            for (const auto& c : condition_categories)
                if (action_categories.count(c))
                    throw ConfigError("category '" + c +
                                      "' is in both condition and action sets; set "
                                      "allow_overlap to permit this");
        }
    }

    bool is_condition(const std::string& type) const { return condition_categories.count(type) > 0; }
    bool is_action(const std::string& type) const { return action_categories.count(type) > 0; }

    ValuePolicy policy_of(const std::string& type) const {
        if (auto it = policies.find(type); it != policies.end()) return it->second;
        return is_action(type) ? ValuePolicy::Bare : ValuePolicy::Boolean;
    }

    // "AgeGroup" -> "Age Group"
    static std::string display_name(const std::string& type) {
        std::string out;
        for (size_t i = 0; i < type.size(); ++i) {
            if (i > 0 && std::isupper(static_cast<unsigned char>(type[i])) &&
                !std::isupper(static_cast<unsigned char>(type[i - 1])))
                out += ' ';
            out += type[i];
        }
        return out;
    }

    static CategoryConfig from_json(const nlohmann::json& j) {
        CategoryConfig cfg;
        for (const auto& c : j.at("condition_categories"))
            cfg.condition_categories.insert(c.get<std::string>());
        for (const auto& c : j.at("action_categories"))
            cfg.action_categories.insert(c.get<std::string>());
        cfg.allow_overlap = j.value("allow_overlap", false);
        if (j.contains("policies"))
            for (const auto& [type, policy] : j.at("policies").items())
                cfg.policies[type] = value_policy_from_name(policy.get<std::string>());
        cfg.validate();
        return cfg;
    }

    static CategoryConfig from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open categories config: " + path);
        nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
        if (j.is_discarded()) throw DataError("categories config is not valid JSON: " + path);
        return from_json(j);
    }
};

}  // namespace cpgrules
