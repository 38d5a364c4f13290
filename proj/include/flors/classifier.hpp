#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "flors/corpus.hpp"
#include "flors/sparse.hpp"

namespace flors {

struct TrainConfig {
    double regularization_strength = 1.0;
    double convergence_tolerance = 1e-4;
    int max_epochs = 50;
    std::uint64_t seed = 0;
};

// Frozen after training; safe for concurrent readers.
class LinearModel {
public:
    LinearModel() = default;
    LinearModel(TagSet tag_order, std::size_t feature_dim);

    const TagSet& tag_order() const { return tags_; }
    std::size_t feature_dim() const { return feature_dim_; }
    std::span<const double> weights(std::size_t tag_id) const { return weights_[tag_id]; }
    double bias(std::size_t tag_id) const { return bias_[tag_id]; }
    bool single_tag_warning() const { return single_tag_warning_; }

    std::span<double> mutable_weights(std::size_t tag_id) { return weights_[tag_id]; }
    void set_bias(std::size_t tag_id, double b) { bias_[tag_id] = b; }
    void set_single_tag_warning(bool v) { single_tag_warning_ = v; }

private:
    TagSet tags_;
    std::size_t feature_dim_ = 0;
    std::vector<std::vector<double>> weights_;  // one dense vector per tag
    std::vector<double> bias_;
    bool single_tag_warning_ = false;
};

// score_t = w_t . x + b_t
std::vector<double> scores(const LinearModel& model, const SparseVec& x);

// argmax over scores; exact ties go to the earlier tag in tag_order.
std::size_t predict_id(const LinearModel& model, const SparseVec& x);
const std::string& predict(const LinearModel& model, const SparseVec& x);

// Feature closure plus its fixed dimensionality.
struct Featurizer {
    std::size_t dim = 0;
    std::function<SparseVec(const Sentence&, std::size_t)> fn;
};

// Loss curve per one-vs-rest problem, for convergence monitoring.
struct TrainDiagnostics {
    std::vector<std::vector<double>> objective_per_epoch;  // indexed by tag id
};

// Fits one L2-regularized binary logistic problem per tag (positive = gold
// tag, negative = everything else) by full-batch gradient descent with
// Armijo backtracking. Example order is a seed-derived permutation held
// fixed for the whole run, so retraining with the same seed is bit-identical.
LinearModel train(const Corpus& corpus, const Featurizer& featurizer, const TrainConfig& config,
                  TrainDiagnostics* diagnostics = nullptr);

// Regularized logistic objective and gradient at (w, b) for labels in
// {+1,-1}: 0.5*lambda*|w|^2 + sum_i log(1 + exp(-y_i (w.x_i + b))).
// The bias is not regularized. Exposed for gradient checking.
double logistic_objective(std::span<const SparseVec> examples, std::span<const signed char> labels,
                          std::span<const double> w, double b, double lambda,
                          std::span<double> grad_w, double* grad_b);

// Versioned container: tag order, dimensionality, sparse per-tag weights.
void save_model(const LinearModel& model, std::ostream& out);
void save_model_file(const LinearModel& model, const std::string& path);
LinearModel load_model(std::istream& in);
LinearModel load_model_file(const std::string& path);

}  // namespace flors
