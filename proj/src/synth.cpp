#include "flors/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "flors/rng.hpp"

namespace flors {

namespace {

std::string tag_name(std::size_t t) {
    std::string s = "T";
    s.push_back(static_cast<char>('0' + t / 10));
    s.push_back(static_cast<char>('0' + t % 10));
    return s;
}

// Three letters, distinct per tag for tag_count <= 99.
std::string tag_suffix(std::size_t t) {
    std::string s = "s";
    s.push_back(static_cast<char>('a' + t % 26));
    s.push_back(static_cast<char>('a' + (t / 26) % 26));
    return s;
}

std::string fresh_word(std::mt19937_64& rng, std::size_t suffix_tag,
                       std::unordered_set<std::string>& used) {
    for (;;) {
        const std::size_t stem_len = 3 + uniform_below(rng, 4);
        std::string w;
        for (std::size_t i = 0; i < stem_len; ++i)
            w.push_back(static_cast<char>('a' + uniform_below(rng, 26)));
        w += tag_suffix(suffix_tag);
        if (used.insert(w).second) return w;
    }
}

// Zipfian sampler over a fixed word list: P(rank r) proportional to 1/(r+1).
class ZipfVocab {
public:
    explicit ZipfVocab(std::vector<std::string> words) : words_(std::move(words)) {
        cumulative_.reserve(words_.size());
        double total = 0.0;
        for (std::size_t r = 0; r < words_.size(); ++r) {
            total += 1.0 / static_cast<double>(r + 1);
            cumulative_.push_back(total);
        }
    }

    const std::vector<std::string>& words() const { return words_; }

    const std::string& sample(std::mt19937_64& rng) const {
        const double u = uniform_unit(rng) * cumulative_.back();
        const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), u);
        return words_[static_cast<std::size_t>(it - cumulative_.begin())];
    }

private:
    std::vector<std::string> words_;
    std::vector<double> cumulative_;
};

// Weighted sample of `take` distinct indices, weight 1/(rank+1), so shared
// words skew toward the frequent end of the source vocabulary.
std::vector<std::size_t> sample_frequent_biased(std::mt19937_64& rng, std::size_t universe,
                                                std::size_t take) {
    std::vector<double> weight(universe);
    for (std::size_t r = 0; r < universe; ++r) weight[r] = 1.0 / static_cast<double>(r + 1);
    std::vector<std::size_t> picked;
    picked.reserve(take);
    std::vector<bool> taken(universe, false);
    for (std::size_t k = 0; k < take; ++k) {
        double total = 0.0;
        for (std::size_t r = 0; r < universe; ++r)
            if (!taken[r]) total += weight[r];
        double u = uniform_unit(rng) * total;
        std::size_t choice = universe;
        for (std::size_t r = 0; r < universe; ++r) {
            if (taken[r]) continue;
            u -= weight[r];
            if (u <= 0.0) {
                choice = r;
                break;
            }
        }
        if (choice == universe) {  // numeric tail: last free slot
            for (std::size_t r = universe; r-- > 0;)
                if (!taken[r]) {
                    choice = r;
                    break;
                }
        }
        taken[choice] = true;
        picked.push_back(choice);
    }
    return picked;
}

}  // namespace

SyntheticShiftPair generate_shift_pair(const SyntheticShiftConfig& cfg) {
    if (cfg.tag_count == 0) throw std::invalid_argument("tag count must be >= 1");
    if (cfg.tag_count > 99) throw std::invalid_argument("tag count must be <= 99");
    if (cfg.overlap_fraction < 0.0 || cfg.overlap_fraction > 1.0)
        throw std::invalid_argument("overlap fraction must lie in [0, 1]");
    if (cfg.source_vocab_size < cfg.tag_count || cfg.target_vocab_size < cfg.tag_count)
        throw std::invalid_argument("vocabulary sizes must be >= tag count");
    if (cfg.sentence_len_min == 0 || cfg.sentence_len_min > cfg.sentence_len_max)
        throw std::invalid_argument("sentence length bounds must satisfy 1 <= min <= max");
    if (cfg.source_sentences == 0 || cfg.target_sentences == 0)
        throw std::invalid_argument("sentence counts must be >= 1");

    const std::size_t k = cfg.tag_count;
    std::mt19937_64 rng(cfg.seed);
    std::unordered_set<std::string> used;

    // With probability suffix_fidelity a word ends with its own tag's
    // suffix, otherwise with a random other tag's; the surface-level cue is
    // informative but not decisive.
    const auto word_for_tag = [&](std::size_t t) {
        std::size_t suffix_tag = t;
        if (k > 1 && uniform_unit(rng) >= cfg.suffix_fidelity) {
            std::size_t other = uniform_below(rng, k - 1);
            suffix_tag = other >= t ? other + 1 : other;
        }
        return fresh_word(rng, suffix_tag, used);
    };

    // Source vocabulary, split evenly across tags.
    const std::size_t src_per_tag = cfg.source_vocab_size / k;
    std::vector<std::vector<std::string>> source_words(k);
    for (std::size_t t = 0; t < k; ++t)
        for (std::size_t i = 0; i < src_per_tag; ++i) source_words[t].push_back(word_for_tag(t));

    // Target vocabulary: overlap * size words re-used from the source tag
    // vocabulary (frequent-biased), the rest fresh; shared words keep the
    // frequent ranks in the target as well.
    const std::size_t tgt_per_tag = cfg.target_vocab_size / k;
    std::vector<std::vector<std::string>> target_words(k);
    for (std::size_t t = 0; t < k; ++t) {
        std::size_t shared =
            static_cast<std::size_t>(std::llround(cfg.overlap_fraction * tgt_per_tag));
        shared = std::min(shared, src_per_tag);
        for (std::size_t r : sample_frequent_biased(rng, src_per_tag, shared))
            target_words[t].push_back(source_words[t][r]);
        for (std::size_t i = shared; i < tgt_per_tag; ++i)
            target_words[t].push_back(word_for_tag(t));
    }

    SyntheticShiftPair pair;
    std::vector<ZipfVocab> source_vocab;
    std::vector<ZipfVocab> target_vocab;
    source_vocab.reserve(k);
    target_vocab.reserve(k);
    for (std::size_t t = 0; t < k; ++t) {
        pair.source_words.insert(pair.source_words.end(), source_words[t].begin(),
                                 source_words[t].end());
        pair.target_words.insert(pair.target_words.end(), target_words[t].begin(),
                                 target_words[t].end());
        source_vocab.emplace_back(std::move(source_words[t]));
        target_vocab.emplace_back(std::move(target_words[t]));
    }

    const auto emit_corpus = [&](const std::vector<ZipfVocab>& tag_vocab,
                                 std::size_t n_sentences) {
        Corpus corpus;
        corpus.labeled = true;
        corpus.sentences.reserve(n_sentences);
        for (std::size_t s = 0; s < n_sentences; ++s) {
            const std::size_t len =
                cfg.sentence_len_min +
                uniform_below(rng, cfg.sentence_len_max - cfg.sentence_len_min + 1);
            Sentence sent;
            sent.tokens.reserve(len);
            std::size_t tag = uniform_below(rng, k);
            for (std::size_t i = 0; i < len; ++i) {
                std::size_t emit_tag = tag;
                if (k > 1 && uniform_unit(rng) < cfg.emission_noise) {
                    // borrow a word from another tag's vocabulary; the gold
                    // tag stays the state's tag, producing unseen pairings
                    std::size_t other = uniform_below(rng, k - 1);
                    emit_tag = other >= tag ? other + 1 : other;
                }
                sent.tokens.push_back(Token{tag_vocab[emit_tag].sample(rng), tag_name(tag)});
                if (k > 1) {
                    if (uniform_unit(rng) < cfg.next_tag_fidelity)
                        tag = (tag + 1) % k;
                    else
                        tag = uniform_below(rng, k);
                }
            }
            corpus.sentences.push_back(std::move(sent));
        }
        return corpus;
    };

    pair.source = emit_corpus(source_vocab, cfg.source_sentences);
    pair.target = emit_corpus(target_vocab, cfg.target_sentences);
    return pair;
}

}  // namespace flors
