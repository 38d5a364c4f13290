#pragma once

#include <cstdint>
#include <string>

#include "flors/corpus.hpp"

namespace flors {

// Two hidden-Markov tag-emission processes sharing transition structure but
// with partially disjoint emission vocabularies. Word surfaces carry a noisy
// tag-specific suffix, emission distributions are Zipfian, and the shared
// part of the target vocabulary is biased toward frequent source words so
// that the domains share their high-frequency words, the way real domains
// share function words.
struct SyntheticShiftConfig {
    std::size_t tag_count = 8;
    std::size_t source_vocab_size = 1600;  // word types across all tags
    std::size_t target_vocab_size = 1600;
    double overlap_fraction = 0.5;  // fraction of target types drawn from source
    std::size_t source_sentences = 2000;
    std::size_t target_sentences = 600;
    std::size_t sentence_len_min = 8;  // lengths uniform in [min, max]
    std::size_t sentence_len_max = 20;
    double next_tag_fidelity = 0.75;  // P(next tag follows the cycle)
    double suffix_fidelity = 0.55;    // P(word carries its own tag's suffix)
    double emission_noise = 0.03;     // P(word borrowed from another tag's vocab)
    std::uint64_t seed = 1;
};

struct SyntheticShiftPair {
    Corpus source;  // labeled
    Corpus target;  // labeled
    std::vector<std::string> source_words;  // generating word lists
    std::vector<std::string> target_words;
};

SyntheticShiftPair generate_shift_pair(const SyntheticShiftConfig& config);

}  // namespace flors
