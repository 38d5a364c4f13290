#include "flors/synth.hpp"

#include <stdexcept>
#include <unordered_set>

#include "doctest.h"
#include "flors/corpus.hpp"

using namespace flors;

namespace {

SyntheticShiftConfig small_config() {
    SyntheticShiftConfig cfg;
    cfg.tag_count = 5;
    cfg.source_vocab_size = 200;
    cfg.target_vocab_size = 200;
    cfg.source_sentences = 60;
    cfg.target_sentences = 40;
    cfg.sentence_len_min = 4;
    cfg.sentence_len_max = 12;
    cfg.seed = 42;
    return cfg;
}

double oov_rate(const Corpus& target, const Corpus& source) {
    const auto vocab = vocabulary_of(source);
    std::size_t oov = 0, total = 0;
    for (const Sentence& s : target.sentences)
        for (const Token& t : s.tokens) {
            ++total;
            oov += vocab.contains(t.surface) ? 0 : 1;
        }
    return static_cast<double>(oov) / static_cast<double>(total);
}

}  // namespace

TEST_CASE("generator is deterministic under the seed") {
    SyntheticShiftConfig cfg = small_config();
    SyntheticShiftPair a = generate_shift_pair(cfg);
    SyntheticShiftPair b = generate_shift_pair(cfg);
    CHECK(a.source == b.source);
    CHECK(a.target == b.target);

    cfg.seed = 43;
    SyntheticShiftPair c = generate_shift_pair(cfg);
    CHECK_FALSE(a.source == c.source);
}

TEST_CASE("generated corpora are labeled with the configured tag inventory") {
    SyntheticShiftConfig cfg = small_config();
    SyntheticShiftPair pair = generate_shift_pair(cfg);
    CHECK(pair.source.labeled);
    CHECK(pair.target.labeled);
    CHECK(pair.source.sentences.size() == cfg.source_sentences);
    CHECK(pair.target.sentences.size() == cfg.target_sentences);
    TagSet tags = tag_set_of(pair.source);
    CHECK(tags.size() == cfg.tag_count);
    for (const Sentence& s : pair.source.sentences) {
        CHECK(s.size() >= cfg.sentence_len_min);
        CHECK(s.size() <= cfg.sentence_len_max);
    }
}

TEST_CASE("overlap one keeps the target vocabulary inside the source vocabulary") {
    SyntheticShiftConfig cfg = small_config();
    cfg.overlap_fraction = 1.0;
    SyntheticShiftPair pair = generate_shift_pair(cfg);
    std::unordered_set<std::string> source(pair.source_words.begin(), pair.source_words.end());
    for (const std::string& w : pair.target_words) CHECK(source.contains(w));
}

TEST_CASE("overlap zero makes nearly every target token out-of-vocabulary") {
    SyntheticShiftConfig cfg = small_config();
    cfg.overlap_fraction = 0.0;
    SyntheticShiftPair pair = generate_shift_pair(cfg);
    CHECK(oov_rate(pair.target, pair.source) == 1.0);
}

TEST_CASE("degenerate configurations are rejected") {
    SyntheticShiftConfig cfg = small_config();
    cfg.tag_count = 0;
    CHECK_THROWS_AS(generate_shift_pair(cfg), std::invalid_argument);
    cfg = small_config();
    cfg.overlap_fraction = 1.5;
    CHECK_THROWS_AS(generate_shift_pair(cfg), std::invalid_argument);
    cfg = small_config();
    cfg.sentence_len_min = 9;
    cfg.sentence_len_max = 4;
    CHECK_THROWS_AS(generate_shift_pair(cfg), std::invalid_argument);
    cfg = small_config();
    cfg.source_vocab_size = 2;
    CHECK_THROWS_AS(generate_shift_pair(cfg), std::invalid_argument);
}
