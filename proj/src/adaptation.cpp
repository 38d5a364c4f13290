#include "flors/adaptation.hpp"

#include <stdexcept>

namespace flors {

const char* mode_name(Mode mode) {
    switch (mode) {
        case Mode::Static: return "static";
        case Mode::Batch: return "batch";
        case Mode::Online: return "online";
    }
    return "?";
}

Mode parse_mode(const std::string& name) {
    if (name == "static") return Mode::Static;
    if (name == "batch") return Mode::Batch;
    if (name == "online") return Mode::Online;
    throw std::invalid_argument("unknown mode: " + name + " (expected static|batch|online)");
}

TaggerSession TaggerSession::make_static(const LinearModel& model, const FeatureSpace& space,
                                         std::shared_ptr<const CountStore> store) {
    TaggerSession s;
    s.mode_ = Mode::Static;
    s.model_ = &model;
    s.space_ = space;
    s.shared_store_ = std::move(store);
    return s;
}

TaggerSession TaggerSession::make_adaptive(Mode mode, const LinearModel& model,
                                           const FeatureSpace& space, CountStore store) {
    if (mode == Mode::Static)
        throw std::invalid_argument("static sessions share a frozen store; use make_static");
    TaggerSession s;
    s.mode_ = mode;
    s.model_ = &model;
    s.space_ = space;
    s.own_store_ = std::move(store);
    return s;
}

void TaggerSession::prepare_batch(const Corpus& test_corpus) {
    if (mode_ != Mode::Batch)
        throw std::logic_error("prepare_batch is only valid on a batch session");
    if (batch_prepared_) throw std::logic_error("prepare_batch called twice");
    if (tagging_started_) throw std::logic_error("prepare_batch must precede tagging");
    accumulate_counts(*own_store_, *space_.vocab, test_corpus);
    batch_prepared_ = true;
}

std::vector<std::string> TaggerSession::tag_sentence(const Sentence& sentence) {
    if (mode_ == Mode::Batch && !batch_prepared_)
        throw std::logic_error("batch session tagged before prepare_batch");
    tagging_started_ = true;
    if (mode_ == Mode::Online) accumulate_counts(*own_store_, *space_.vocab, sentence);
    const std::vector<SparseVec> features = featurize_sentence(sentence, store(), space_);
    std::vector<std::string> tags;
    tags.reserve(sentence.size());
    for (std::size_t i = 0; i < sentence.size(); ++i) {
        const std::string& tag = predict(*model_, features[i]);
        tags.push_back(tag);
        if (log_enabled_ && log_.size() < log_limit_)
            log_.push_back(PredictionRecord{sentence.tokens[i].surface,
                                            sentence.tokens[i].gold_tag, tag});
    }
    tokens_tagged_ += sentence.size();
    return tags;
}

namespace {

struct SentenceFeatureCache {
    Sentence sentence;
    std::vector<SparseVec> features;
};

}  // namespace

Featurizer make_featurizer(const CountStore& store, const FeatureSpace& space) {
    Featurizer f;
    f.dim = space.dim();
    // Featurizing a sentence once and slicing per token keeps train() from
    // recomputing every word representation per window position.
    auto cache = std::make_shared<SentenceFeatureCache>();
    f.fn = [&store, space, cache](const Sentence& sent, std::size_t i) {
        if (!(cache->sentence == sent)) {
            cache->features = featurize_sentence(sent, store, space);
            cache->sentence = sent;
        }
        return cache->features.at(i);
    };
    return f;
}

std::optional<std::pair<Sentence, std::vector<std::string>>> StreamTagger::next() {
    std::optional<Sentence> sent = source_();
    if (!sent) return std::nullopt;
    std::vector<std::string> tags = session_->tag_sentence(*sent);
    return std::make_pair(std::move(*sent), std::move(tags));
}

}  // namespace flors
