#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "flors/classifier.hpp"
#include "flors/corpus.hpp"
#include "flors/features.hpp"

namespace flors {

enum class Mode { Static, Batch, Online };

const char* mode_name(Mode mode);
Mode parse_mode(const std::string& name);

struct PredictionRecord {
    std::string surface;
    std::optional<std::string> gold;
    std::string predicted;
};

// Binds a frozen model to a count store and a tag-time update policy.
// Static sessions share a read-only store; Batch and Online sessions own a
// private copy they mutate. A session is a single logical thread of control:
// for Online the whole sentence's bigrams are folded in before any of its
// tokens are tagged.
class TaggerSession {
public:
    static TaggerSession make_static(const LinearModel& model, const FeatureSpace& space,
                                     std::shared_ptr<const CountStore> store);
    static TaggerSession make_adaptive(Mode mode, const LinearModel& model,
                                       const FeatureSpace& space, CountStore store);

    Mode mode() const { return mode_; }
    const CountStore& store() const { return own_store_ ? *own_store_ : *shared_store_; }
    const LinearModel& model() const { return *model_; }
    std::uint64_t tokens_tagged() const { return tokens_tagged_; }

    // Prediction log retention; disabling it makes tagging constant-memory
    // per sentence but time-course evaluation unavailable.
    void set_log_enabled(bool enabled) { log_enabled_ = enabled; }
    void set_log_limit(std::size_t max_records) { log_limit_ = max_records; }
    const std::vector<PredictionRecord>& prediction_log() const { return log_; }

    // Batch only, exactly once, before any tagging: folds the whole test
    // corpus's bigram counts into the store.
    void prepare_batch(const Corpus& test_corpus);

    // Online: update counts with this sentence, then tag it with the updated
    // representations. Static/Batch: tag with the store as-is.
    std::vector<std::string> tag_sentence(const Sentence& sentence);

private:
    TaggerSession() = default;

    Mode mode_ = Mode::Static;
    const LinearModel* model_ = nullptr;
    FeatureSpace space_{};
    std::shared_ptr<const CountStore> shared_store_;
    std::optional<CountStore> own_store_;
    bool batch_prepared_ = false;
    bool tagging_started_ = false;
    std::uint64_t tokens_tagged_ = 0;
    bool log_enabled_ = true;
    std::size_t log_limit_ = static_cast<std::size_t>(-1);
    std::vector<PredictionRecord> log_;
};

// Binds token_feature_vector over a frozen store for training. The store
// and space must outlive the featurizer.
Featurizer make_featurizer(const CountStore& store, const FeatureSpace& space);

// Pull-based lazy tagging: sentences are read from `source` one at a time
// and side effects on the store happen in input order. Memory is bounded by
// store growth, not stream length.
class StreamTagger {
public:
    using Source = std::function<std::optional<Sentence>()>;

    StreamTagger(TaggerSession& session, Source source)
        : session_(&session), source_(std::move(source)) {}

    std::optional<std::pair<Sentence, std::vector<std::string>>> next();

private:
    TaggerSession* session_;
    Source source_;
};

}  // namespace flors
