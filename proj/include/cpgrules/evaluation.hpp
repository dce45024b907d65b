#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "cpgrules/errors.hpp"
#include "cpgrules/rules.hpp"
#include "cpgrules/strings.hpp"

namespace cpgrules {

// Maps term variants to canonical display forms ("ccb" -> "calcium channel
// blocker", "sbp goal" -> "SBP Goal"). Lookup keys are case-folded; targets
// keep their case and must be fixed points themselves.
class SynonymMap {
public:
    SynonymMap() = default;

    // TSV: variant<TAB>canonical. '#' comments skipped.
    static SynonymMap from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open synonym map: " + path);
        SynonymMap syn;
        std::string line;
        size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty() || line[0] == '#') continue;
            auto tab = line.find('\t');
            if (tab == std::string::npos)
                throw DataError("synonym map line " + std::to_string(line_no) +
                                ": expected variant<TAB>canonical");
            syn.add(line.substr(0, tab), str::trim(line.substr(tab + 1)));
        }
        return syn;
    }

    void add(const std::string& variant, const std::string& canonical) {
        map_[str::lower(str::trim(variant))] = canonical;
    }

    // Canonical form: synonym-mapped when a folded entry exists, otherwise
    // the trimmed input unchanged.
    std::string canon(const std::string& s) const {
        std::string t = str::trim(s);
        auto it = map_.find(str::lower(t));
        return it == map_.end() ? t : it->second;
    }

    size_t size() const { return map_.size(); }

private:
    std::unordered_map<std::string, std::string> map_;
};

struct CanonicalTriple {
    std::string key, op, value;

    std::string fold_key() const {
        return str::lower(key) + "\x01" + op + "\x01" + str::lower(value);
    }
    bool operator<(const CanonicalTriple& other) const { return fold_key() < other.fold_key(); }
    bool operator==(const CanonicalTriple& other) const { return fold_key() == other.fold_key(); }
};

// A rule reduced to set semantics: condition order is irrelevant and
// duplicate triples collapse. Equality is case-insensitive on every
// component; display strings are kept for rendering.
struct CanonicalRule {
    std::set<CanonicalTriple> conditions;
    std::set<CanonicalTriple> actions;

    std::string fold_key() const {
        std::string k;
        for (const auto& c : conditions) k += c.fold_key() + "\x02";
        k += "\x03";
        for (const auto& a : actions) k += a.fold_key() + "\x02";
        return k;
    }
    bool operator<(const CanonicalRule& other) const { return fold_key() < other.fold_key(); }
    bool operator==(const CanonicalRule& other) const { return fold_key() == other.fold_key(); }
};

namespace detail {

inline std::string strip_quotes_and_dot(std::string v) {
    v = str::trim(v);
    while (!v.empty() && v.back() == '.') v.pop_back();
    if (v.size() >= 2 && ((v.front() == '\'' && v.back() == '\'') ||
                          (v.front() == '"' && v.back() == '"')))
        v = v.substr(1, v.size() - 2);
    return str::trim(v);
}

}  // namespace detail

// Canonical value text: quotes and trailing periods stripped, "Yes"/"No"
// case pinned, OR-alternatives mapped component-wise through the synonyms.
inline std::string canonical_value(const std::string& value, const std::string& unit,
                                   const SynonymMap& syn) {
    std::string joined = value;
    if (!unit.empty()) joined += " " + syn.canon(unit);
    joined = detail::strip_quotes_and_dot(joined);
    auto lower = str::lower(joined);
    if (lower == "yes") return "Yes";
    if (lower == "no") return "No";
    // split disjunctions on the rendered " OR " (either case)
    std::vector<std::string> parts;
    size_t start = 0;
    std::string upper = joined;
    std::transform(upper.begin(), upper.end(), upper.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    while (true) {
        size_t pos = upper.find(" OR ", start);
        if (pos == std::string::npos) {
            parts.push_back(joined.substr(start));
            break;
        }
        parts.push_back(joined.substr(start, pos - start));
        start = pos + 4;
    }
    std::vector<std::string> mapped;
    for (auto& p : parts) mapped.push_back(syn.canon(detail::strip_quotes_and_dot(p)));
    return str::join(mapped, " OR ");
}

inline CanonicalTriple canonicalize_triple(const ConditionTriple& t, const SynonymMap& syn) {
    CanonicalTriple c;
    c.key = syn.canon(t.key);
    if (!t.op.empty()) {
        auto op = ascii_operator(t.op);
        c.op = op ? *op : t.op;
    }
    c.value = canonical_value(t.value, t.unit, syn);
    return c;
}

// Keys and values mapped through synonyms, compared case-insensitively,
// duplicates collapsed. Idempotent: canonicalizing a canonical rule is a
// no-op.
inline CanonicalRule canonicalize(const Rule& rule, const SynonymMap& syn = {}) {
    CanonicalRule out;
    for (const auto& c : rule.conditions) out.conditions.insert(canonicalize_triple(c, syn));
    for (const auto& a : rule.actions) out.actions.insert(canonicalize_triple(a, syn));
    return out;
}

inline std::string render_canonical_triple(const CanonicalTriple& t) {
    if (t.value.empty() && (t.op.empty() || t.op == "=")) return t.key;
    return t.key + " " + pretty_operator(t.op.empty() ? "=" : t.op) + " " + t.value;
}

// Deterministic rendering: conditions and actions each sorted
// case-insensitively by their rendered text.
inline std::string render_canonical(const CanonicalRule& rule) {
    std::vector<std::string> conds, acts;
    for (const auto& c : rule.conditions) conds.push_back(render_canonical_triple(c));
    for (const auto& a : rule.actions) acts.push_back(render_canonical_triple(a));
    auto by_fold = [](const std::string& a, const std::string& b) { return str::iless(a, b); };
    std::sort(conds.begin(), conds.end(), by_fold);
    std::sort(acts.begin(), acts.end(), by_fold);
    return "IF " + str::join(conds, " AND ") + " THEN " + str::join(acts, " AND ");
}

using CanonicalRuleSet = std::set<CanonicalRule>;

inline CanonicalRuleSet canonicalize_all(const std::vector<Rule>& rules,
                                         const SynonymMap& syn = {}) {
    CanonicalRuleSet out;
    for (const auto& r : rules) out.insert(canonicalize(r, syn));
    return out;
}

struct JaccardResult {
    double value = 0.0;
    size_t intersection = 0;
    size_t union_size = 0;
    bool both_empty = false;  // 0/0 convention: defined as 1.0 and flagged
};

inline JaccardResult jaccard(const CanonicalRuleSet& a, const CanonicalRuleSet& b) {
    JaccardResult r;
    for (const auto& rule : a)
        if (b.count(rule)) ++r.intersection;
    r.union_size = a.size() + b.size() - r.intersection;
    if (r.union_size == 0) {
        r.both_empty = true;
        r.value = 1.0;
    } else {
        r.value = static_cast<double>(r.intersection) / static_cast<double>(r.union_size);
    }
    return r;
}

struct ComparisonReport {
    std::vector<std::string> participants;           // "system", then expert names
    std::vector<std::string> rule_texts;             // union of rules, rendered
    std::vector<std::vector<bool>> matrix;           // [rule][participant]
    std::vector<JaccardResult> jaccard_per_expert;   // vs. system, expert order

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["participants"] = participants;
        nlohmann::json rows = nlohmann::json::array();
        for (size_t r = 0; r < rule_texts.size(); ++r) {
            nlohmann::json row;
            row["rule"] = rule_texts[r];
            nlohmann::json marks = nlohmann::json::array();
            for (bool m : matrix[r]) marks.push_back(m);
            row["extracted_by"] = marks;
            rows.push_back(row);
        }
        j["rules"] = rows;
        nlohmann::json jc = nlohmann::json::array();
        for (size_t e = 0; e < jaccard_per_expert.size(); ++e) {
            const auto& res = jaccard_per_expert[e];
            jc.push_back({{"expert", participants[e + 1]},
                          {"jaccard", res.value},
                          {"jaccard_1dp", std::round(res.value * 10.0) / 10.0},
                          {"intersection", res.intersection},
                          {"union", res.union_size},
                          {"both_empty", res.both_empty}});
        }
        j["jaccard"] = jc;
        return j;
    }

    std::string to_text() const {
        std::ostringstream out;
        size_t width = 4;
        for (const auto& r : rule_texts) width = std::max(width, r.size());
        width = std::min<size_t>(width, 100);
        out << std::left << std::setw(static_cast<int>(width)) << "Rule";
        for (const auto& p : participants) out << "  " << p;
        out << "\n";
        for (size_t r = 0; r < rule_texts.size(); ++r) {
            std::string text = rule_texts[r];
            if (text.size() > width) text = text.substr(0, width - 3) + "...";
            out << std::left << std::setw(static_cast<int>(width)) << text;
            for (size_t p = 0; p < participants.size(); ++p)
                out << "  " << std::setw(static_cast<int>(participants[p].size()))
                    << (matrix[r][p] ? "Y" : "-");
            out << "\n";
        }
        for (size_t e = 0; e < jaccard_per_expert.size(); ++e) {
            const auto& res = jaccard_per_expert[e];
            out << "JC(system, " << participants[e + 1] << ") = " << res.value << " ("
                << res.intersection << "/" << res.union_size << ")"
                << (res.both_empty ? " [both empty]" : "") << "\n";
        }
        return out.str();
    }
};

// Table-5 style comparison: one row per distinct canonical rule, one column
// per participant, plus the per-expert Jaccard coefficients.
inline ComparisonReport compare_rule_sets(const CanonicalRuleSet& system,
                                          const std::vector<CanonicalRuleSet>& experts,
                                          std::vector<std::string> expert_names = {}) {
    ComparisonReport report;
    report.participants.push_back("system");
    for (size_t e = 0; e < experts.size(); ++e) {
        report.participants.push_back(e < expert_names.size()
                                          ? expert_names[e]
                                          : "expert" + std::to_string(e + 1));
    }

    std::map<std::string, std::pair<CanonicalRule, std::vector<bool>>> rows;
    auto mark = [&](const CanonicalRuleSet& set, size_t column, size_t columns) {
        for (const auto& rule : set) {
            auto [it, inserted] = rows.try_emplace(
                rule.fold_key(), std::make_pair(rule, std::vector<bool>(columns, false)));
            it->second.second[column] = true;
        }
    };
    size_t columns = experts.size() + 1;
    mark(system, 0, columns);
    for (size_t e = 0; e < experts.size(); ++e) mark(experts[e], e + 1, columns);

    for (const auto& [_, row] : rows) {
        report.rule_texts.push_back(render_canonical(row.first));
        report.matrix.push_back(row.second);
    }
    for (const auto& expert : experts) report.jaccard_per_expert.push_back(jaccard(system, expert));
    return report;
}

}  // namespace cpgrules
