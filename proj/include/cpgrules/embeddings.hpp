#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <zlib.h>

#include "cpgrules/errors.hpp"
#include "cpgrules/strings.hpp"
#include "cpgrules/text_types.hpp"

namespace cpgrules {

using Vector = std::vector<double>;

// Cosine similarity, Eq. form sum(u_j v_j) / (|u| |v|). Throws ZeroVector
// when either norm is zero.
inline double cosine(const Vector& u, const Vector& v) {
    if (u.size() != v.size())
        throw Error("cosine: dimension mismatch (" + std::to_string(u.size()) + " vs " +
                    std::to_string(v.size()) + ")");
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (size_t j = 0; j < u.size(); ++j) {
        dot += u[j] * v[j];
        nu += u[j] * u[j];
        nv += v[j] * v[j];
    }
    if (nu == 0.0 || nv == 0.0) throw ZeroVector();
    return dot / (std::sqrt(nu) * std::sqrt(nv));
}

struct Neighbor {
    std::string term;
    double similarity;
};

// Term -> dense vector map of fixed dimensionality. Immutable after load;
// all queries are read-only.
class EmbeddingTable {
public:
    EmbeddingTable() = default;

    explicit EmbeddingTable(size_t dim) : dim_(dim) {}

    size_t dim() const { return dim_; }
    size_t size() const { return entries_.size(); }

    // Terms are stored lowercase.
    void insert(const std::string& term, Vector v) {
        if (dim_ == 0) dim_ = v.size();
        if (v.size() != dim_)
            throw Error("embedding insert: vector length " + std::to_string(v.size()) +
                        " != table dim " + std::to_string(dim_));
        entries_[str::lower(term)] = std::move(v);
    }

    bool contains(const std::string& term) const { return entries_.count(str::lower(term)) > 0; }

    const Vector* find(const std::string& term) const {
        auto it = entries_.find(str::lower(term));
        return it == entries_.end() ? nullptr : &it->second;
    }

    const Vector& at(const std::string& term) const {
        const Vector* v = find(term);
        if (!v) throw TermNotFound(term);
        return *v;
    }

    // Mean of the in-vocabulary component word vectors of a (possibly
    // multi-word) phrase; nullopt when every word is out of vocabulary.
    std::optional<Vector> phrase_vector(const std::string& phrase) const {
        Vector acc(dim_, 0.0);
        size_t found = 0;
        for (const auto& word : str::split(str::lower(phrase), ' ')) {
            if (word.empty()) continue;
            if (const Vector* v = find(word)) {
                for (size_t j = 0; j < dim_; ++j) acc[j] += (*v)[j];
                ++found;
            }
        }
        if (found == 0) return std::nullopt;
        for (auto& x : acc) x /= static_cast<double>(found);
        return acc;
    }

    // Exact top-k scan, descending similarity, ties broken lexicographically
    // by term; the query term itself is excluded.
    std::vector<Neighbor> nearest_neighbors(const std::string& term, size_t k) const {
        const Vector& q = at(term);
        if (std::all_of(q.begin(), q.end(), [](double x) { return x == 0.0; }))
            throw ZeroVector();
        std::string query = str::lower(term);
        std::vector<Neighbor> all;
        all.reserve(entries_.size());
        for (const auto& [t, v] : entries_) {
            if (t == query) continue;
            double sim;
            try {
                sim = cosine(q, v);
            } catch (const ZeroVector&) {
                continue;  // zero-vector candidates have no direction; skip
            }
            all.push_back({t, sim});
        }
        std::sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) {
            if (a.similarity != b.similarity) return a.similarity > b.similarity;
            return a.term < b.term;
        });
        if (all.size() > k) all.resize(k);
        return all;
    }

    const std::unordered_map<std::string, Vector>& entries() const { return entries_; }

private:
    size_t dim_ = 0;
    std::unordered_map<std::string, Vector> entries_;
};

namespace detail {

inline std::string read_maybe_gzip(const std::string& path) {
    if (str::ends_with(path, ".gz")) {
        gzFile f = gzopen(path.c_str(), "rb");
        if (!f) throw ConfigError("cannot open embedding file: " + path);
        std::string content;
        char buf[1 << 16];
        int n;
        while ((n = gzread(f, buf, sizeof(buf))) > 0) content.append(buf, static_cast<size_t>(n));
        bool bad = n < 0;
        gzclose(f);
        if (bad) throw DataError("gzip read error in " + path);
        return content;
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open embedding file: " + path);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace detail

// Loads word2vec text format: header "count dim", then one
// "term v1 .. v_dim" row per line. Duplicate terms: last row wins and a
// warning is reported through `warn`.
inline EmbeddingTable load_embeddings(
    const std::string& path,
    const std::function<void(const std::string&)>& warn = [](const std::string&) {}) {
    std::istringstream in(detail::read_maybe_gzip(path));

    std::string header;
    if (!std::getline(in, header)) throw MalformedHeader("empty embedding file: " + path);
    std::istringstream hs(header);
    long long count = -1, dim = -1;
    if (!(hs >> count >> dim) || count < 0 || dim <= 0)
        throw MalformedHeader("expected header 'count dim' in " + path + ", got: " + header);
    {
        std::string extra;
        if (hs >> extra) throw MalformedHeader("trailing content in header of " + path);
    }

    EmbeddingTable table(static_cast<size_t>(dim));
    std::string line;
    size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (str::trim(line).empty()) continue;
        std::istringstream ls(line);
        std::string term;
        ls >> term;
        Vector v;
        v.reserve(static_cast<size_t>(dim));
        double x;
        while (ls >> x) v.push_back(x);
        if (v.size() != static_cast<size_t>(dim))
            throw DimensionMismatch(line_no, static_cast<size_t>(dim), v.size());
        if (table.contains(term))
            warn("duplicate embedding term '" + str::lower(term) + "' at line " +
                 std::to_string(line_no) + "; keeping the last occurrence");
        table.insert(term, std::move(v));
    }
    return table;
}

// Improved-word-vector composition: [word vector | POS one-hot | position
// one-hot]. OOV words get a zero word segment. Position bucket is
// floor(P * index / sentence_len), clamped to P-1.
struct IwvLayout {
    size_t word_dim = 0;
    int position_buckets = 10;
    bool use_pos = true;
    bool use_position = true;

    size_t size() const {
        return word_dim + (use_pos ? static_cast<size_t>(kTagsetSize) : 0) +
               (use_position ? static_cast<size_t>(position_buckets) : 0);
    }
};

inline int position_bucket(int index, int sentence_len, int buckets) {
    int b = static_cast<int>(static_cast<long long>(buckets) * index / sentence_len);
    return std::min(b, buckets - 1);
}

inline Vector compose_iwv(const Token& token, int sentence_len, const EmbeddingTable& table,
                          const IwvLayout& layout) {
    Vector out(layout.size(), 0.0);
    if (const Vector* wv = table.find(token.normalized))
        std::copy(wv->begin(), wv->end(), out.begin());
    size_t base = layout.word_dim;
    if (layout.use_pos) {
        out[base + static_cast<size_t>(token.pos)] = 1.0;
        base += static_cast<size_t>(kTagsetSize);
    }
    if (layout.use_position)
        out[base + static_cast<size_t>(
                       position_bucket(token.index, sentence_len, layout.position_buckets))] = 1.0;
    return out;
}

}  // namespace cpgrules
