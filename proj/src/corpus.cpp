#include "flors/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <stdexcept>

#include "flors/rng.hpp"

namespace flors {

namespace {

bool has_whitespace(const std::string& s) {
    return s.find(' ') != std::string::npos || s.find('\t') != std::string::npos;
}

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

[[noreturn]] void malformed(std::size_t line_no, const std::string& what) {
    throw std::runtime_error("line " + std::to_string(line_no) + ": " + what);
}

std::ifstream open_or_throw(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    return in;
}

}  // namespace

std::size_t Corpus::token_count() const {
    std::size_t n = 0;
    for (const auto& s : sentences) n += s.size();
    return n;
}

TagSet::TagSet(std::vector<std::string> sorted_tags) : tags_(std::move(sorted_tags)) {
    for (std::size_t i = 0; i < tags_.size(); ++i) index_.emplace(tags_[i], i);
}

std::optional<std::size_t> TagSet::id_of(const std::string& tag) const {
    auto it = index_.find(tag);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

TagSet tag_set_of(const Corpus& corpus) {
    std::set<std::string> seen;
    for (const auto& sent : corpus.sentences)
        for (const auto& tok : sent.tokens)
            if (tok.gold_tag) seen.insert(*tok.gold_tag);
    return TagSet(std::vector<std::string>(seen.begin(), seen.end()));
}

std::unordered_set<std::string> vocabulary_of(const Corpus& corpus) {
    std::unordered_set<std::string> vocab;
    for (const auto& sent : corpus.sentences)
        for (const auto& tok : sent.tokens) vocab.insert(tok.surface);
    return vocab;
}

Corpus read_labeled(std::istream& in) {
    Corpus corpus;
    corpus.labeled = true;
    Sentence current;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (line.empty()) {
            if (!current.tokens.empty()) {
                corpus.sentences.push_back(std::move(current));
                current = Sentence{};
            }
            continue;
        }
        auto tab = line.find('\t');
        if (tab == std::string::npos) malformed(line_no, "expected 2 tab-separated columns");
        if (line.find('\t', tab + 1) != std::string::npos)
            malformed(line_no, "expected 2 tab-separated columns");
        std::string surface = line.substr(0, tab);
        std::string tag = line.substr(tab + 1);
        if (surface.empty()) malformed(line_no, "empty surface");
        if (tag.empty()) malformed(line_no, "empty tag");
        if (has_whitespace(surface)) malformed(line_no, "surface contains whitespace");
        current.tokens.push_back(Token{std::move(surface), std::move(tag)});
    }
    if (!current.tokens.empty()) corpus.sentences.push_back(std::move(current));
    if (corpus.sentences.empty()) throw std::runtime_error("no sentences");
    return corpus;
}

Corpus read_labeled_file(const std::string& path) {
    auto in = open_or_throw(path);
    return read_labeled(in);
}

void write_labeled(const Corpus& corpus, std::ostream& out) {
    for (const auto& sent : corpus.sentences) {
        for (const auto& tok : sent.tokens)
            out << tok.surface << '\t' << (tok.gold_tag ? *tok.gold_tag : std::string()) << '\n';
        out << '\n';
    }
}

void write_labeled_file(const Corpus& corpus, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path);
    write_labeled(corpus, out);
}

std::optional<Sentence> parse_unlabeled_line(const std::string& line) {
    Sentence sent;
    std::size_t pos = 0;
    while (pos < line.size()) {
        std::size_t start = line.find_first_not_of(" \t", pos);
        if (start == std::string::npos) break;
        std::size_t end = line.find_first_of(" \t", start);
        if (end == std::string::npos) end = line.size();
        sent.tokens.push_back(Token{line.substr(start, end - start), std::nullopt});
        pos = end;
    }
    if (sent.tokens.empty()) return std::nullopt;
    return sent;
}

Corpus read_unlabeled(std::istream& in) {
    Corpus corpus;
    corpus.labeled = false;
    std::string line;
    while (std::getline(in, line)) {
        strip_cr(line);
        if (auto sent = parse_unlabeled_line(line)) corpus.sentences.push_back(std::move(*sent));
    }
    if (corpus.sentences.empty()) throw std::runtime_error("no sentences");
    return corpus;
}

Corpus read_unlabeled_file(const std::string& path) {
    auto in = open_or_throw(path);
    return read_unlabeled(in);
}

Corpus sample_fraction(const Corpus& corpus, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0) || fraction > 1.0)
        throw std::invalid_argument("fraction must be in (0, 1]");
    const std::size_t n = corpus.sentences.size();
    const auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::mt19937_64 rng(seed);
    // Partial Fisher-Yates: the first k slots end up a uniform sample.
    for (std::size_t i = 0; i < k && i + 1 < n; ++i) {
        std::size_t j = i + static_cast<std::size_t>(uniform_below(rng, n - i));
        std::swap(order[i], order[j]);
    }
    order.resize(k);
    std::sort(order.begin(), order.end());
    Corpus out;
    out.labeled = corpus.labeled;
    out.sentences.reserve(k);
    for (std::size_t i : order) out.sentences.push_back(corpus.sentences[i]);
    return out;
}

}  // namespace flors
