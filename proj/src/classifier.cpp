#include "flors/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include "binio.hpp"
#include "flors/rng.hpp"

namespace flors {

namespace {

constexpr char kModelMagic[] = "FLORSMDL";
constexpr std::uint32_t kModelVersion = 1;

// log(1 + exp(u)) without overflow.
double log1pexp(double u) {
    if (u > 0.0) return u + std::log1p(std::exp(-u));
    return std::log1p(std::exp(u));
}

struct Objective {
    std::span<const SparseVec> examples;
    std::span<const signed char> labels;
    std::span<const std::uint32_t> order;  // summation order, fixed per run
    double lambda;

    double value(std::span<const double> w, double b) const {
        double loss = 0.0;
        for (std::uint32_t i : order) {
            const double margin = dot(w, examples[i]) + b;
            loss += log1pexp(-static_cast<double>(labels[i]) * margin);
        }
        double reg = 0.0;
        for (double wi : w) reg += wi * wi;
        return 0.5 * lambda * reg + loss;
    }

    double value_and_gradient(std::span<const double> w, double b, std::span<double> grad_w,
                              double* grad_b) const {
        std::fill(grad_w.begin(), grad_w.end(), 0.0);
        double gb = 0.0;
        double loss = 0.0;
        for (std::uint32_t i : order) {
            const double y = static_cast<double>(labels[i]);
            const double margin = dot(w, examples[i]) + b;
            loss += log1pexp(-y * margin);
            // d/dm log(1+exp(-y m)) = -y * sigmoid(-y m)
            const double coeff = -y / (1.0 + std::exp(y * margin));
            axpy(coeff, examples[i], grad_w);
            gb += coeff;
        }
        double reg = 0.0;
        for (std::size_t j = 0; j < w.size(); ++j) {
            reg += w[j] * w[j];
            grad_w[j] += lambda * w[j];
        }
        *grad_b = gb;
        return 0.5 * lambda * reg + loss;
    }
};

// Full-batch gradient descent with Armijo backtracking. Monotone in the
// objective and fully deterministic.
std::vector<double> fit_binary(const Objective& obj, std::size_t dim, double tolerance,
                               int max_epochs, double* bias_out,
                               std::vector<double>* objective_trace) {
    constexpr double kArmijo = 1e-4;
    std::vector<double> w(dim, 0.0);
    std::vector<double> grad(dim, 0.0);
    std::vector<double> trial(dim, 0.0);
    double b = 0.0;
    double grad_b = 0.0;
    double f = obj.value_and_gradient(w, b, grad, &grad_b);
    if (objective_trace) objective_trace->push_back(f);
    double step = 1.0;
    for (int epoch = 0; epoch < max_epochs; ++epoch) {
        double grad_sq = grad_b * grad_b;
        for (double g : grad) grad_sq += g * g;
        if (grad_sq == 0.0) break;
        step = std::min(step * 2.0, 1e6);
        double f_trial = 0.0;
        double b_trial = 0.0;
        bool accepted = false;
        for (int halving = 0; halving < 60; ++halving) {
            for (std::size_t j = 0; j < dim; ++j) trial[j] = w[j] - step * grad[j];
            b_trial = b - step * grad_b;
            f_trial = obj.value(trial, b_trial);
            if (f_trial <= f - kArmijo * step * grad_sq) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
        w.swap(trial);
        b = b_trial;
        const double f_prev = f;
        f = obj.value_and_gradient(w, b, grad, &grad_b);
        if (objective_trace) objective_trace->push_back(f);
        if (f_prev - f <= tolerance * std::max(1.0, std::abs(f_prev))) break;
    }
    *bias_out = b;
    return w;
}

}  // namespace

LinearModel::LinearModel(TagSet tag_order, std::size_t feature_dim)
    : tags_(std::move(tag_order)),
      feature_dim_(feature_dim),
      weights_(tags_.size(), std::vector<double>(feature_dim, 0.0)),
      bias_(tags_.size(), 0.0) {}

std::vector<double> scores(const LinearModel& model, const SparseVec& x) {
    std::vector<double> out(model.tag_order().size());
    for (std::size_t t = 0; t < out.size(); ++t) out[t] = dot(model.weights(t), x) + model.bias(t);
    return out;
}

std::size_t predict_id(const LinearModel& model, const SparseVec& x) {
    const std::vector<double> s = scores(model, x);
    std::size_t best = 0;
    for (std::size_t t = 1; t < s.size(); ++t)
        if (s[t] > s[best]) best = t;
    return best;
}

const std::string& predict(const LinearModel& model, const SparseVec& x) {
    return model.tag_order().tag(predict_id(model, x));
}

double logistic_objective(std::span<const SparseVec> examples, std::span<const signed char> labels,
                          std::span<const double> w, double b, double lambda,
                          std::span<double> grad_w, double* grad_b) {
    std::vector<std::uint32_t> order(examples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<std::uint32_t>(i);
    Objective obj{examples, labels, order, lambda};
    return obj.value_and_gradient(w, b, grad_w, grad_b);
}

LinearModel train(const Corpus& corpus, const Featurizer& featurizer, const TrainConfig& config,
                  TrainDiagnostics* diagnostics) {
    if (!corpus.labeled || corpus.sentences.empty())
        throw std::invalid_argument("training requires a non-empty labeled corpus");
    if (config.regularization_strength <= 0.0 || config.convergence_tolerance <= 0.0 ||
        config.max_epochs <= 0)
        throw std::invalid_argument("train config values must be positive");

    const TagSet tags = tag_set_of(corpus);
    LinearModel model(tags, featurizer.dim);
    if (diagnostics) diagnostics->objective_per_epoch.assign(tags.size(), {});
    if (tags.size() <= 1) {
        model.set_single_tag_warning(true);
        return model;
    }

    std::vector<SparseVec> examples;
    std::vector<std::uint32_t> gold_ids;
    examples.reserve(corpus.token_count());
    gold_ids.reserve(corpus.token_count());
    for (const Sentence& sent : corpus.sentences) {
        for (std::size_t i = 0; i < sent.size(); ++i) {
            examples.push_back(featurizer.fn(sent, i));
            if (!examples.back().idx.empty() && examples.back().idx.back() >= featurizer.dim)
                throw std::invalid_argument("featurizer emitted an index beyond its dimensionality");
            gold_ids.push_back(static_cast<std::uint32_t>(*tags.id_of(*sent.tokens[i].gold_tag)));
        }
    }

    // Seed-derived visit order, fixed for the whole run.
    std::vector<std::uint32_t> order(examples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<std::uint32_t>(i);
    std::mt19937_64 rng(config.seed);
    for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[uniform_below(rng, i)]);

    std::vector<signed char> labels(examples.size());
    for (std::size_t t = 0; t < tags.size(); ++t) {
        for (std::size_t i = 0; i < examples.size(); ++i)
            labels[i] = gold_ids[i] == t ? 1 : -1;
        Objective obj{examples, labels, order, config.regularization_strength};
        double bias = 0.0;
        std::vector<double>* trace =
            diagnostics ? &diagnostics->objective_per_epoch[t] : nullptr;
        std::vector<double> w = fit_binary(obj, featurizer.dim, config.convergence_tolerance,
                                           config.max_epochs, &bias, trace);
        std::copy(w.begin(), w.end(), model.mutable_weights(t).begin());
        model.set_bias(t, bias);
    }
    return model;
}

void save_model(const LinearModel& model, std::ostream& out) {
    out.write(kModelMagic, sizeof(kModelMagic) - 1);
    binio::write_u32(out, kModelVersion);
    binio::write_u32(out, static_cast<std::uint32_t>(model.tag_order().size()));
    for (const std::string& tag : model.tag_order().tags()) binio::write_string(out, tag);
    binio::write_u64(out, model.feature_dim());
    out.put(model.single_tag_warning() ? 1 : 0);
    for (std::size_t t = 0; t < model.tag_order().size(); ++t) {
        const auto w = model.weights(t);
        std::uint64_t nnz = 0;
        for (double v : w) nnz += v != 0.0;
        binio::write_u64(out, nnz);
        for (std::size_t j = 0; j < w.size(); ++j) {
            if (w[j] == 0.0) continue;
            binio::write_u32(out, static_cast<std::uint32_t>(j));
            binio::write_f64(out, w[j]);
        }
        binio::write_f64(out, model.bias(t));
    }
    if (!out) throw std::runtime_error("failed writing model");
}

void save_model_file(const LinearModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path);
    save_model(model, out);
}

LinearModel load_model(std::istream& in) {
    binio::expect_magic(in, kModelMagic, "model");
    const std::uint32_t version = binio::read_u32(in);
    if (version != kModelVersion)
        throw std::runtime_error("unsupported model format version " + std::to_string(version));
    const std::uint32_t tag_count = binio::read_u32(in);
    std::vector<std::string> tags(tag_count);
    for (auto& t : tags) t = binio::read_string(in);
    const std::uint64_t dim = binio::read_u64(in);
    const int warning = in.get();
    if (warning < 0) throw std::runtime_error("unexpected end of file");
    LinearModel model(TagSet(std::move(tags)), dim);
    model.set_single_tag_warning(warning != 0);
    for (std::uint32_t t = 0; t < tag_count; ++t) {
        const std::uint64_t nnz = binio::read_u64(in);
        auto w = model.mutable_weights(t);
        for (std::uint64_t k = 0; k < nnz; ++k) {
            const std::uint32_t j = binio::read_u32(in);
            if (j >= dim) throw std::runtime_error("model weight index out of range");
            w[j] = binio::read_f64(in);
        }
        model.set_bias(t, binio::read_f64(in));
    }
    return model;
}

LinearModel load_model_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    return load_model(in);
}

}  // namespace flors
