#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "flors/corpus.hpp"
#include "flors/sparse.hpp"

namespace flors {

// Distributional counting pools case variants; suffix and shape features keep
// the original casing. Folding is ASCII-only: non-ASCII bytes pass through.
std::string ascii_lower(std::string_view s);

// 0 for zero counts, 1 + ln(count) otherwise.
double tf_weight(std::uint64_t count);

// Character classes: uppercase -> 'X', lowercase -> 'x', digit -> 'd', any
// other byte -> itself; runs of the same output symbol collapse to one.
std::string shape_of(std::string_view word);

// The n most frequent lowercased surfaces, rank 1 = most frequent, ties
// broken lexicographically. Frozen after construction.
class IndicatorVocab {
public:
    IndicatorVocab() = default;
    explicit IndicatorVocab(std::vector<std::string> rank_ordered_words);

    std::size_t size() const { return words_.size(); }
    const std::vector<std::string>& words() const { return words_; }
    // 1-based frequency rank of a lowercased word; 0 if not an indicator.
    std::size_t rank_of(const std::string& lowercased) const;

    bool operator==(const IndicatorVocab& other) const { return words_ == other.words_; }

private:
    std::vector<std::string> words_;
    std::unordered_map<std::string, std::size_t> rank_;
};

IndicatorVocab build_indicator_vocab(std::span<const Corpus> corpora, std::size_t n);

// Per-word sparse bigram counts against the indicator vocabulary.
// Cell indices are 0-based: cell i < n counts the indicator word of rank i+1,
// cell n aggregates all non-indicator (omitted) contexts, raw and unweighted.
// Counts only ever increase.
class CountStore {
public:
    // (cell index, count), sorted by cell index, counts all > 0.
    using Cells = std::vector<std::pair<std::uint32_t, std::uint64_t>>;
    using Table = std::map<std::string, Cells>;

    CountStore() = default;
    explicit CountStore(std::size_t n) : n_(n) {}

    std::size_t n() const { return n_; }
    std::size_t omitted_cell() const { return n_; }
    std::uint64_t total_tokens_seen() const { return total_tokens_seen_; }

    const Cells* left_cells(const std::string& lowercased) const;
    const Cells* right_cells(const std::string& lowercased) const;
    const Table& left() const { return left_; }
    const Table& right() const { return right_; }

    void add_left(const std::string& word, std::uint32_t cell, std::uint64_t amount);
    void add_right(const std::string& word, std::uint32_t cell, std::uint64_t amount);
    void note_tokens(std::uint64_t count) { total_tokens_seen_ += count; }

    // Sum over every cell of both sides.
    std::uint64_t total_count() const;
    // FNV-1a over the canonical serialization; detects any cell change.
    std::uint64_t digest() const;

    bool operator==(const CountStore& other) const;

private:
    std::size_t n_ = 0;
    std::uint64_t total_tokens_seen_ = 0;
    Table left_;
    Table right_;
};

// Folds one sentence's bigrams into the store. A virtual boundary token
// precedes the first and follows the last token; it is counted only through
// the omitted-context cell of its real-word neighbour.
void accumulate_counts(CountStore& store, const IndicatorVocab& vocab, const Sentence& sentence);
void accumulate_counts(CountStore& store, const IndicatorVocab& vocab, const Corpus& corpus);

// tf-weighted, L2-normalized copy of one side's counts for `word`
// (lowercased before lookup). All-zero for unknown words. Never mutates the
// store. Dense length is n+1; the return value carries only non-zeros.
enum class Side { Left, Right };
SparseVec distributional_vector(const CountStore& store, const std::string& word, Side side);

// Case-sensitive suffixes of length 1..4 kept if they occur at least
// `min_count` times in the build corpora; columns in lexicographic order.
class SuffixLexicon {
public:
    SuffixLexicon() = default;
    explicit SuffixLexicon(std::vector<std::string> sorted_suffixes);

    std::size_t size() const { return suffixes_.size(); }
    const std::vector<std::string>& suffixes() const { return suffixes_; }
    // Column of a suffix, or npos when absent.
    std::size_t column_of(const std::string& suffix) const;

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    std::vector<std::string> suffixes_;
    std::unordered_map<std::string, std::size_t> index_;
};

constexpr std::size_t kDefaultSuffixMinCount = 10;

SuffixLexicon build_suffix_lexicon(std::span<const Corpus> corpora,
                                   std::size_t min_count = kDefaultSuffixMinCount);

// Observed shapes in lexicographic order, then two reserved columns:
// UNKNOWN_SHAPE for unseen shapes and BOUNDARY for the virtual boundary
// token.
class ShapeLexicon {
public:
    ShapeLexicon() = default;
    explicit ShapeLexicon(std::vector<std::string> sorted_shapes);

    // Total column count including the two reserved columns.
    std::size_t size() const { return shapes_.size() + 2; }
    const std::vector<std::string>& shapes() const { return shapes_; }
    std::size_t unknown_column() const { return shapes_.size(); }
    std::size_t boundary_column() const { return shapes_.size() + 1; }
    // Column of a shape string, falling back to unknown_column().
    std::size_t column_of(const std::string& shape) const;

private:
    std::vector<std::string> shapes_;
    std::unordered_map<std::string, std::size_t> index_;
};

ShapeLexicon build_shape_lexicon(std::span<const Corpus> corpora);

// Immutable bundle of the three lexicons plus the derived feature geometry.
//
// One word occupies a block of width `word_dim()` laid out as
//   [0, n+1)                    left distributional
//   [n+1, 2(n+1))               right distributional
//   [2(n+1), 2(n+1)+S)          suffix indicators (S = suffix lexicon size)
//   [2(n+1)+S, word_dim())      shape one-hot
// and a token feature vector concatenates five such blocks for window
// positions i-2 .. i+2, out-of-sentence positions filled by the boundary
// token.
struct FeatureSpace {
    const IndicatorVocab* vocab = nullptr;
    const SuffixLexicon* suffix_lex = nullptr;
    const ShapeLexicon* shape_lex = nullptr;

    std::size_t word_dim() const {
        return 2 * (vocab->size() + 1) + suffix_lex->size() + shape_lex->size();
    }
    std::size_t dim() const { return 5 * word_dim(); }
};

struct WordRepresentation {
    SparseVec left_block;    // dense length n+1
    SparseVec right_block;   // dense length n+1
    std::vector<std::uint32_t> suffix_columns;
    std::uint32_t shape_column = 0;
};

WordRepresentation word_representation(const CountStore& store, const FeatureSpace& space,
                                       const std::string& word);
WordRepresentation boundary_representation(const FeatureSpace& space);

// f(v_{i-2}) (+) f(v_{i-1}) (+) f(v_i) (+) f(v_{i+1}) (+) f(v_{i+2})
SparseVec token_feature_vector(const Sentence& sentence, std::size_t i, const CountStore& store,
                               const FeatureSpace& space);

// Feature vectors for every token of the sentence; each distinct surface is
// represented once and reused across windows. Identical output to calling
// token_feature_vector per position.
std::vector<SparseVec> featurize_sentence(const Sentence& sentence, const CountStore& store,
                                          const FeatureSpace& space);

// Versioned container holding vocabulary, both lexicons and the counts.
// Byte-identical for identical contents.
struct Representations {
    IndicatorVocab vocab;
    SuffixLexicon suffix_lex;
    ShapeLexicon shape_lex;
    CountStore store;

    FeatureSpace space() const { return FeatureSpace{&vocab, &suffix_lex, &shape_lex}; }
};

void save_representations(const Representations& reps, std::ostream& out);
void save_representations_file(const Representations& reps, const std::string& path);
Representations load_representations(std::istream& in);
Representations load_representations_file(const std::string& path);

}  // namespace flors
