#pragma once

#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "cpgrules/errors.hpp"
#include "cpgrules/strings.hpp"

namespace cpgrules {

enum class Direction { Left, Right };

inline const char* direction_name(Direction d) { return d == Direction::Left ? "LEFT" : "RIGHT"; }

inline std::optional<Direction> direction_from_name(const std::string& name) {
    auto u = str::lower(name);
    if (u == "left") return Direction::Left;
    if (u == "right") return Direction::Right;
    if (u == "-" || u.empty()) return std::nullopt;
    throw DataError("bad direction: " + name + " (expected LEFT, RIGHT or -)");
}

// A cue phrase that locates condition and action phrases in a sentence.
// Entries without directions are inactive: they are kept in the lexicon for
// auditing but never used for rule extraction.
struct QualifierEntry {
    std::string phrase;  // normalized, space-separated tokens
    double weight = 0.0;
    std::optional<Direction> cond_dir;
    std::optional<Direction> act_dir;
    std::string origin = "seed";  // mined | seed | expanded(<parent phrase>)

    bool active() const { return cond_dir.has_value() && act_dir.has_value(); }

    std::vector<std::string> phrase_tokens() const {
        std::vector<std::string> out;
        for (auto& w : str::split(phrase, ' '))
            if (!w.empty()) out.push_back(w);
        return out;
    }
};

// TSV: phrase<TAB>weight<TAB>cond_dir<TAB>act_dir<TAB>origin. '#' comments.
inline std::vector<QualifierEntry> load_qualifier_lexicon(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open qualifier lexicon: " + path);
    std::vector<QualifierEntry> entries;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto cols = str::split(line, '\t');
        if (cols.size() < 4)
            throw DataError("qualifier lexicon line " + std::to_string(line_no) +
                            ": expected phrase, weight, cond_dir, act_dir[, origin]");
        QualifierEntry e;
        e.phrase = str::lower(str::trim(cols[0]));
        try {
            e.weight = std::stod(cols[1]);
        } catch (const std::exception&) {
            throw DataError("qualifier lexicon line " + std::to_string(line_no) +
                            ": bad weight '" + cols[1] + "'");
        }
        e.cond_dir = direction_from_name(str::trim(cols[2]));
        e.act_dir = direction_from_name(str::trim(cols[3]));
        e.origin = cols.size() > 4 ? str::trim(cols[4]) : "seed";
        entries.push_back(std::move(e));
    }
    return entries;
}

inline void save_qualifier_lexicon(const std::vector<QualifierEntry>& entries, std::ostream& out) {
    out << "# phrase\tweight\tcond_dir\tact_dir\torigin\n";
    for (const auto& e : entries) {
        std::ostringstream w;
        w << e.weight;
        out << e.phrase << '\t' << w.str() << '\t'
            << (e.cond_dir ? direction_name(*e.cond_dir) : "-") << '\t'
            << (e.act_dir ? direction_name(*e.act_dir) : "-") << '\t' << e.origin << '\n';
    }
}

}  // namespace cpgrules
