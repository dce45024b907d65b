#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "cpgrules/embeddings.hpp"
#include "cpgrules/errors.hpp"
#include "cpgrules/metrics.hpp"
#include "cpgrules/rng.hpp"
#include "cpgrules/text_types.hpp"

namespace cpgrules {

struct TrainConfig {
    int epochs = 10;
    double train_fraction = 0.7;
    double learning_rate = 1e-3;
    std::uint64_t seed = 42;
    int hidden_dim = 64;
    bool shuffle = true;
    int batch_size = 16;
    int max_seq_len = 64;       // sentences are truncated beyond this
    int position_buckets = 10;
    bool use_iwv = true;        // false: plain word-vector inputs, no POS/position segments
    bool class_weighting = false;

    void validate() const {
        if (epochs < 1) throw ConfigError("epochs must be >= 1");
        if (!(train_fraction > 0.0 && train_fraction < 1.0))
            throw ConfigError("train_fraction must be in (0, 1)");
        if (learning_rate <= 0.0) throw ConfigError("learning_rate must be > 0");
        if (hidden_dim < 1) throw ConfigError("hidden_dim must be >= 1");
        if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
        if (max_seq_len < 1) throw ConfigError("max_seq_len must be >= 1");
        if (position_buckets < 1) throw ConfigError("position_buckets must be >= 1");
    }
};

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Parameters of a single-layer GRU with a dense softmax head:
//   z_t = sigmoid(Wz x_t + Uz h_{t-1} + bz)
//   r_t = sigmoid(Wr x_t + Ur h_{t-1} + br)
//   c_t = tanh(Wh x_t + Uh (r_t . h_{t-1}) + bh)
//   h_t = (1 - z_t) . c_t + z_t . h_{t-1}
//   logits = Wo h_T + bo
struct GruParams {
    MatrixXd Wz, Wr, Wh;  // hidden x input
    MatrixXd Uz, Ur, Uh;  // hidden x hidden
    VectorXd bz, br, bh;  // hidden
    MatrixXd Wo;          // classes x hidden
    VectorXd bo;          // classes

    void resize(int input_dim, int hidden_dim) {
        Wz = MatrixXd::Zero(hidden_dim, input_dim);
        Wr = MatrixXd::Zero(hidden_dim, input_dim);
        Wh = MatrixXd::Zero(hidden_dim, input_dim);
        Uz = MatrixXd::Zero(hidden_dim, hidden_dim);
        Ur = MatrixXd::Zero(hidden_dim, hidden_dim);
        Uh = MatrixXd::Zero(hidden_dim, hidden_dim);
        bz = VectorXd::Zero(hidden_dim);
        br = VectorXd::Zero(hidden_dim);
        bh = VectorXd::Zero(hidden_dim);
        Wo = MatrixXd::Zero(kClassCount, hidden_dim);
        bo = VectorXd::Zero(kClassCount);
    }

    // Weight matrices uniform in (-sqrt(1/fan_in), +sqrt(1/fan_in)), biases
    // zero. Draw order is fixed so a seed pins the whole initialization.
    void init(int input_dim, int hidden_dim, Rng& rng) {
        resize(input_dim, hidden_dim);
        auto fill = [&rng](MatrixXd& m, int fan_in) {
            double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
            for (Eigen::Index c = 0; c < m.cols(); ++c)
                for (Eigen::Index r = 0; r < m.rows(); ++r)
                    m(r, c) = rng.uniform(-bound, bound);
        };
        fill(Wz, input_dim);
        fill(Wr, input_dim);
        fill(Wh, input_dim);
        fill(Uz, hidden_dim);
        fill(Ur, hidden_dim);
        fill(Uh, hidden_dim);
        fill(Wo, hidden_dim);
    }

    struct Slot {
        const char* name;
        double* data;
        Eigen::Index size;
    };

    struct ConstSlot {
        const char* name;
        const double* data;
        Eigen::Index size;
    };

    // Flat views over every parameter tensor, in a fixed order shared by the
    // optimizer, the serializer and the gradient checker.
    std::vector<Slot> slots() {
        return {
            {"Wz", Wz.data(), Wz.size()}, {"Wr", Wr.data(), Wr.size()},
            {"Wh", Wh.data(), Wh.size()}, {"Uz", Uz.data(), Uz.size()},
            {"Ur", Ur.data(), Ur.size()}, {"Uh", Uh.data(), Uh.size()},
            {"bz", bz.data(), bz.size()}, {"br", br.data(), br.size()},
            {"bh", bh.data(), bh.size()}, {"Wo", Wo.data(), Wo.size()},
            {"bo", bo.data(), bo.size()},
        };
    }

    std::vector<ConstSlot> slots() const {
        return {
            {"Wz", Wz.data(), Wz.size()}, {"Wr", Wr.data(), Wr.size()},
            {"Wh", Wh.data(), Wh.size()}, {"Uz", Uz.data(), Uz.size()},
            {"Ur", Ur.data(), Ur.size()}, {"Uh", Uh.data(), Uh.size()},
            {"bz", bz.data(), bz.size()}, {"br", br.data(), br.size()},
            {"bh", bh.data(), bh.size()}, {"Wo", Wo.data(), Wo.size()},
            {"bo", bo.data(), bo.size()},
        };
    }

    Eigen::Index total_size() const {
        return Wz.size() + Wr.size() + Wh.size() + Uz.size() + Ur.size() + Uh.size() +
               bz.size() + br.size() + bh.size() + Wo.size() + bo.size();
    }
};

// A sentence encoded for the network: one input vector per token plus the
// gold class when training.
struct EncodedSentence {
    std::vector<VectorXd> inputs;
    int label = -1;
};

struct GruModel {
    int input_dim = 0;
    int hidden_dim = 0;
    GruParams params;
    IwvLayout layout;
    int max_seq_len = 64;

    EncodedSentence encode(const SentenceRecord& sentence, const EmbeddingTable& table) const {
        if (sentence.tokens.empty()) throw EmptySentence();
        EncodedSentence enc;
        int len = static_cast<int>(sentence.tokens.size());
        int use = std::min(len, max_seq_len);
        enc.inputs.reserve(static_cast<size_t>(use));
        for (int i = 0; i < use; ++i) {
            Vector v = compose_iwv(sentence.tokens[static_cast<size_t>(i)], len, table, layout);
            enc.inputs.push_back(Eigen::Map<const VectorXd>(v.data(),
                                                            static_cast<Eigen::Index>(v.size())));
        }
        if (sentence.label) enc.label = static_cast<int>(*sentence.label);
        return enc;
    }
};

namespace detail {

inline VectorXd sigmoid(const VectorXd& x) {
    return x.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

struct StepCache {
    VectorXd x, z, r, c, h_prev, h;
};

struct ForwardCache {
    std::vector<StepCache> steps;
    VectorXd logits;
    VectorXd probs;
    double loss = 0.0;  // unweighted cross-entropy of the gold class
};

inline VectorXd softmax(const VectorXd& logits) {
    double mx = logits.maxCoeff();
    VectorXd e = (logits.array() - mx).exp();
    return e / e.sum();
}

inline ForwardCache gru_forward(const GruParams& p, const std::vector<VectorXd>& inputs,
                                int label) {
    ForwardCache cache;
    const Eigen::Index hidden = p.bz.size();
    VectorXd h = VectorXd::Zero(hidden);
    cache.steps.reserve(inputs.size());
    for (const VectorXd& x : inputs) {
        StepCache s;
        s.x = x;
        s.h_prev = h;
        s.z = sigmoid(p.Wz * x + p.Uz * h + p.bz);
        s.r = sigmoid(p.Wr * x + p.Ur * h + p.br);
        s.c = (p.Wh * x + p.Uh * (s.r.cwiseProduct(h)) + p.bh).array().tanh();
        s.h = (VectorXd::Ones(hidden) - s.z).cwiseProduct(s.c) + s.z.cwiseProduct(h);
        h = s.h;
        cache.steps.push_back(std::move(s));
    }
    cache.logits = p.Wo * h + p.bo;
    // log-sum-exp form keeps the loss finite for extreme logits
    double mx = cache.logits.maxCoeff();
    double lse = std::log((cache.logits.array() - mx).exp().sum()) + mx;
    cache.probs = softmax(cache.logits);
    if (label >= 0) cache.loss = lse - cache.logits(label);
    return cache;
}

// Backpropagation through time; accumulates into `g` (scaled by `weight`).
inline void gru_backward(const GruParams& p, const ForwardCache& cache, int label, double weight,
                         GruParams& g) {
    const Eigen::Index hidden = p.bz.size();
    VectorXd dlogits = cache.probs;
    dlogits(label) -= 1.0;
    dlogits *= weight;

    VectorXd h_last = cache.steps.empty() ? VectorXd(VectorXd::Zero(hidden))
                                          : cache.steps.back().h;
    g.Wo += dlogits * h_last.transpose();
    g.bo += dlogits;

    VectorXd dh = p.Wo.transpose() * dlogits;
    for (auto it = cache.steps.rbegin(); it != cache.steps.rend(); ++it) {
        const StepCache& s = *it;
        VectorXd dz = dh.cwiseProduct(s.h_prev - s.c);
        VectorXd dc = dh.cwiseProduct(VectorXd::Ones(hidden) - s.z);
        VectorXd dac = dc.cwiseProduct(VectorXd::Ones(hidden) - s.c.cwiseProduct(s.c));
        VectorXd daz = dz.cwiseProduct(s.z.cwiseProduct(VectorXd::Ones(hidden) - s.z));

        g.Wh += dac * s.x.transpose();
        g.Uh += dac * (s.r.cwiseProduct(s.h_prev)).transpose();
        g.bh += dac;

        VectorXd uh_dac = p.Uh.transpose() * dac;
        VectorXd dr = uh_dac.cwiseProduct(s.h_prev);
        VectorXd dar = dr.cwiseProduct(s.r.cwiseProduct(VectorXd::Ones(hidden) - s.r));

        g.Wr += dar * s.x.transpose();
        g.Ur += dar * s.h_prev.transpose();
        g.br += dar;

        g.Wz += daz * s.x.transpose();
        g.Uz += daz * s.h_prev.transpose();
        g.bz += daz;

        dh = dh.cwiseProduct(s.z) + uh_dac.cwiseProduct(s.r) + p.Ur.transpose() * dar +
             p.Uz.transpose() * daz;
    }
}

}  // namespace detail

// Argmax with first-index tie-break, so prediction is deterministic even
// for exactly tied scores.
inline int argmax_first(const VectorXd& v) {
    int best = 0;
    for (int i = 1; i < v.size(); ++i)
        if (v(i) > v(best)) best = i;
    return best;
}

struct Prediction {
    SentenceClass label;
    std::array<double, kClassCount> scores;
};

inline Prediction predict(const GruModel& model, const SentenceRecord& sentence,
                          const EmbeddingTable& table) {
    EncodedSentence enc = model.encode(sentence, table);
    auto cache = detail::gru_forward(model.params, enc.inputs, -1);
    Prediction pred;
    for (int i = 0; i < kClassCount; ++i) pred.scores[static_cast<size_t>(i)] = cache.probs(i);
    pred.label = static_cast<SentenceClass>(argmax_first(cache.probs));
    return pred;
}

// Seeded shuffle-and-cut split shared by both classifiers. Both sides are
// kept non-empty.
inline std::pair<std::vector<size_t>, std::vector<size_t>> split_train_test(
    size_t n, double train_fraction, Rng& rng) {
    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    rng.shuffle(idx);
    size_t n_train = static_cast<size_t>(std::llround(train_fraction * static_cast<double>(n)));
    n_train = std::clamp<size_t>(n_train, 1, n - 1);
    return {std::vector<size_t>(idx.begin(), idx.begin() + static_cast<long>(n_train)),
            std::vector<size_t>(idx.begin() + static_cast<long>(n_train), idx.end())};
}

namespace detail {

struct Adam {
    double lr, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    std::vector<VectorXd> m, v;
    long t = 0;

    explicit Adam(double lr) : lr(lr) {}

    void step(GruParams& params, GruParams& grads) {
        auto pslots = params.slots();
        auto gslots = grads.slots();
        if (m.empty()) {
            for (const auto& s : pslots) {
                m.emplace_back(VectorXd::Zero(s.size));
                v.emplace_back(VectorXd::Zero(s.size));
            }
        }
        ++t;
        double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
        double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
        for (size_t i = 0; i < pslots.size(); ++i) {
            Eigen::Map<VectorXd> theta(pslots[i].data, pslots[i].size);
            Eigen::Map<VectorXd> grad(gslots[i].data, gslots[i].size);
            m[i] = beta1 * m[i] + (1.0 - beta1) * grad;
            v[i] = beta2 * v[i] + (1.0 - beta2) * grad.cwiseProduct(grad);
            theta.array() -=
                lr * (m[i].array() / bc1) / ((v[i].array() / bc2).sqrt() + eps);
        }
    }
};

inline void check_labels(const std::vector<const SentenceRecord*>& corpus) {
    std::array<int, kClassCount> counts{};
    for (const auto* s : corpus)
        if (s->label) counts[static_cast<size_t>(*s->label)]++;
    int classes = 0;
    for (int c : counts)
        if (c > 0) ++classes;
    if (classes < 2)
        throw InsufficientData("training needs at least one example of at least two classes");
}

}  // namespace detail

struct TrainResult {
    GruModel model;
    Metrics metrics;             // held-out metrics on the (1 - train_fraction) split
    std::vector<double> epoch_loss;
};

inline TrainResult train_gru(const std::vector<SentenceRecord>& corpus, const TrainConfig& config,
                             const EmbeddingTable& table) {
    config.validate();

    std::vector<const SentenceRecord*> usable;
    for (const auto& s : corpus)
        if (s.label && !s.tokens.empty()) usable.push_back(&s);
    if (usable.empty()) throw InsufficientData("no labeled, tokenized sentences in corpus");
    detail::check_labels(usable);

    TrainResult result;
    GruModel& model = result.model;
    model.layout.word_dim = table.dim();
    model.layout.position_buckets = config.position_buckets;
    model.layout.use_pos = config.use_iwv;
    model.layout.use_position = config.use_iwv;
    model.max_seq_len = config.max_seq_len;
    model.input_dim = static_cast<int>(model.layout.size());
    model.hidden_dim = config.hidden_dim;

    Rng rng(config.seed);
    auto [train_idx, test_idx] = split_train_test(usable.size(), config.train_fraction, rng);
    model.params.init(model.input_dim, model.hidden_dim, rng);

    std::vector<EncodedSentence> train_set, test_set;
    train_set.reserve(train_idx.size());
    for (size_t i : train_idx) train_set.push_back(model.encode(*usable[i], table));
    test_set.reserve(test_idx.size());
    for (size_t i : test_idx) test_set.push_back(model.encode(*usable[i], table));

    std::array<double, kClassCount> class_weights;
    class_weights.fill(1.0);
    if (config.class_weighting) {
        std::array<int, kClassCount> counts{};
        for (const auto& e : train_set) counts[static_cast<size_t>(e.label)]++;
        int present = 0;
        for (int c : counts)
            if (c > 0) ++present;
        for (int c = 0; c < kClassCount; ++c)
            if (counts[static_cast<size_t>(c)] > 0)
                class_weights[static_cast<size_t>(c)] =
                    static_cast<double>(train_set.size()) /
                    (static_cast<double>(present) * counts[static_cast<size_t>(c)]);
    }

    detail::Adam adam(config.learning_rate);
    GruParams grads;
    grads.resize(model.input_dim, model.hidden_dim);

    std::vector<size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        if (config.shuffle) rng.shuffle(order);
        double epoch_loss = 0.0;
        for (size_t base = 0; base < order.size(); base += static_cast<size_t>(config.batch_size)) {
            size_t count = std::min(order.size() - base, static_cast<size_t>(config.batch_size));
            for (auto& s : grads.slots())
                Eigen::Map<VectorXd>(s.data, s.size).setZero();
            double batch_loss = 0.0;
            for (size_t k = 0; k < count; ++k) {
                const EncodedSentence& ex = train_set[order[base + k]];
                double w = class_weights[static_cast<size_t>(ex.label)] / static_cast<double>(count);
                auto cache = detail::gru_forward(model.params, ex.inputs, ex.label);
                batch_loss += w * cache.loss;
                detail::gru_backward(model.params, cache, ex.label, w, grads);
            }
            if (!std::isfinite(batch_loss))
                throw NonFiniteLoss("epoch " + std::to_string(epoch + 1) + ", loss " +
                                    std::to_string(batch_loss));
            epoch_loss += batch_loss * static_cast<double>(count);
            adam.step(model.params, grads);
        }
        result.epoch_loss.push_back(epoch_loss / static_cast<double>(order.size()));
    }

    std::vector<int> gold, pred;
    gold.reserve(test_set.size());
    for (const auto& ex : test_set) {
        auto cache = detail::gru_forward(model.params, ex.inputs, -1);
        gold.push_back(ex.label);
        pred.push_back(argmax_first(cache.probs));
    }
    result.metrics = compute_metrics(gold, pred);
    return result;
}

// Max relative error between analytic gradients and central finite
// differences over every parameter scalar. The denominator has an absolute
// floor so that near-zero gradient pairs (including exactly-unused
// parameters) compare on absolute error instead of blowing up.
inline double gradient_check(GruModel& model, const EncodedSentence& example, double epsilon) {
    if (!(epsilon > 0.0) || epsilon < 1e-6 || epsilon > 1e-3)
        throw ConfigError("gradient_check epsilon must be in [1e-6, 1e-3]");
    if (example.label < 0) throw ConfigError("gradient_check needs a labeled example");

    GruParams grads;
    grads.resize(model.input_dim, model.hidden_dim);
    auto cache = detail::gru_forward(model.params, example.inputs, example.label);
    detail::gru_backward(model.params, cache, example.label, 1.0, grads);

    double max_err = 0.0;
    auto pslots = model.params.slots();
    auto gslots = grads.slots();
    for (size_t i = 0; i < pslots.size(); ++i) {
        for (Eigen::Index k = 0; k < pslots[i].size; ++k) {
            double saved = pslots[i].data[k];
            pslots[i].data[k] = saved + epsilon;
            double up = detail::gru_forward(model.params, example.inputs, example.label).loss;
            pslots[i].data[k] = saved - epsilon;
            double down = detail::gru_forward(model.params, example.inputs, example.label).loss;
            pslots[i].data[k] = saved;
            double numeric = (up - down) / (2.0 * epsilon);
            double analytic = gslots[i].data[k];
            double denom = std::max(std::abs(analytic) + std::abs(numeric), 1e-3);
            max_err = std::max(max_err, std::abs(analytic - numeric) / denom);
        }
    }
    return max_err;
}

inline Metrics evaluate(const GruModel& model, const std::vector<SentenceRecord>& testset,
                        const EmbeddingTable& table) {
    std::vector<int> gold, pred;
    for (const auto& s : testset) {
        if (!s.label) continue;
        gold.push_back(static_cast<int>(*s.label));
        pred.push_back(static_cast<int>(predict(model, s, table).label));
    }
    if (gold.empty()) throw EmptyTestSet();
    return compute_metrics(gold, pred);
}

// --- model persistence ------------------------------------------------

inline nlohmann::json model_to_json(const GruModel& model) {
    nlohmann::json j;
    j["format"] = "cpgrules-gru";
    j["version"] = 1;
    j["input_dim"] = model.input_dim;
    j["hidden_dim"] = model.hidden_dim;
    j["max_seq_len"] = model.max_seq_len;
    j["class_order"] = kClassNames;
    j["layout"] = {{"word_dim", model.layout.word_dim},
                   {"position_buckets", model.layout.position_buckets},
                   {"use_pos", model.layout.use_pos},
                   {"use_position", model.layout.use_position}};
    nlohmann::json params;
    for (const auto& s : model.params.slots()) {
        std::vector<double> data(s.data, s.data + s.size);
        params[s.name] = data;
    }
    j["params"] = params;
    return j;
}

inline GruModel model_from_json(const nlohmann::json& j) {
    if (!j.is_object() || j.value("format", std::string()) != "cpgrules-gru")
        throw DataError("not a cpgrules GRU model file");
    GruModel model;
    model.input_dim = j.at("input_dim").get<int>();
    model.hidden_dim = j.at("hidden_dim").get<int>();
    model.max_seq_len = j.at("max_seq_len").get<int>();
    const auto& layout = j.at("layout");
    model.layout.word_dim = layout.at("word_dim").get<size_t>();
    model.layout.position_buckets = layout.at("position_buckets").get<int>();
    model.layout.use_pos = layout.at("use_pos").get<bool>();
    model.layout.use_position = layout.at("use_position").get<bool>();
    model.params.resize(model.input_dim, model.hidden_dim);
    for (auto& s : model.params.slots()) {
        auto data = j.at("params").at(s.name).get<std::vector<double>>();
        if (static_cast<Eigen::Index>(data.size()) != s.size)
            throw DataError(std::string("model tensor ") + s.name + " has wrong size");
        std::copy(data.begin(), data.end(), s.data);
    }
    return model;
}

inline void save_model(const GruModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write model file: " + path);
    out << model_to_json(model).dump(2) << "\n";
}

inline GruModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open model file: " + path);
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw DataError("model file is not valid JSON: " + path);
    return model_from_json(j);
}

}  // namespace cpgrules
