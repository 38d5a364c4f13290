#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace flors {

struct Token {
    std::string surface;
    std::optional<std::string> gold_tag;

    bool operator==(const Token&) const = default;
};

struct Sentence {
    std::vector<Token> tokens;

    std::size_t size() const { return tokens.size(); }
    bool operator==(const Sentence&) const = default;
};

// Immutable after construction; safe to share across concurrent readers.
struct Corpus {
    std::vector<Sentence> sentences;
    bool labeled = false;

    std::size_t token_count() const;
    bool operator==(const Corpus&) const = default;
};

// Ordered set of tag symbols. The ordering is fixed (lexicographic) and
// defines argmax tie-breaks in the classifier.
class TagSet {
public:
    TagSet() = default;
    explicit TagSet(std::vector<std::string> sorted_tags);

    std::size_t size() const { return tags_.size(); }
    const std::string& tag(std::size_t id) const { return tags_[id]; }
    const std::vector<std::string>& tags() const { return tags_; }
    std::optional<std::size_t> id_of(const std::string& tag) const;

    bool operator==(const TagSet& other) const { return tags_ == other.tags_; }

private:
    std::vector<std::string> tags_;
    std::unordered_map<std::string, std::size_t> index_;
};

TagSet tag_set_of(const Corpus& corpus);

// Case-sensitive set of surfaces occurring in the corpus.
std::unordered_set<std::string> vocabulary_of(const Corpus& corpus);

// Two-column vertical format: `surface<TAB>tag` per line, blank line between
// sentences. Throws std::runtime_error naming the offending line.
Corpus read_labeled(std::istream& in);
Corpus read_labeled_file(const std::string& path);
void write_labeled(const Corpus& corpus, std::ostream& out);
void write_labeled_file(const Corpus& corpus, const std::string& path);

// One sentence per line, whitespace-delimited tokens; empty lines skipped.
Corpus read_unlabeled(std::istream& in);
Corpus read_unlabeled_file(const std::string& path);

// Parses one line of the unlabeled format; nullopt for a blank line.
std::optional<Sentence> parse_unlabeled_line(const std::string& line);

// round(fraction * |sentences|) sentences drawn uniformly without
// replacement, original order preserved. Deterministic in (corpus, fraction,
// seed).
Corpus sample_fraction(const Corpus& corpus, double fraction, std::uint64_t seed);

}  // namespace flors
