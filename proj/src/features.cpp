#include "flors/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include "binio.hpp"

namespace flors {

namespace {

constexpr char kRepMagic[] = "FLORSREP";
constexpr std::uint32_t kRepVersion = 1;

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t fnv1a_u64(std::uint64_t h, std::uint64_t v) { return fnv1a(h, &v, sizeof(v)); }

template <typename Fn>
void for_each_suffix(const std::string& word, Fn&& fn) {
    const std::size_t max_len = std::min<std::size_t>(4, word.size());
    for (std::size_t len = 1; len <= max_len; ++len) fn(word.substr(word.size() - len));
}

void add_cell(CountStore::Cells& cells, std::uint32_t cell, std::uint64_t amount) {
    auto it = std::lower_bound(cells.begin(), cells.end(), cell,
                               [](const auto& e, std::uint32_t c) { return e.first < c; });
    if (it != cells.end() && it->first == cell)
        it->second += amount;
    else
        cells.insert(it, {cell, amount});
}

std::uint64_t sum_cells(const CountStore::Table& table) {
    std::uint64_t total = 0;
    for (const auto& [word, cells] : table)
        for (const auto& [cell, count] : cells) total += count;
    return total;
}

}  // namespace

std::string ascii_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
}

double tf_weight(std::uint64_t count) {
    if (count == 0) return 0.0;
    return 1.0 + std::log(static_cast<double>(count));
}

std::string shape_of(std::string_view word) {
    std::string out;
    out.reserve(word.size());
    for (unsigned char c : word) {
        char mapped;
        if (c >= 'A' && c <= 'Z')
            mapped = 'X';
        else if (c >= 'a' && c <= 'z')
            mapped = 'x';
        else if (c >= '0' && c <= '9')
            mapped = 'd';
        else
            mapped = static_cast<char>(c);
        if (out.empty() || out.back() != mapped) out.push_back(mapped);
    }
    return out;
}

IndicatorVocab::IndicatorVocab(std::vector<std::string> rank_ordered_words)
    : words_(std::move(rank_ordered_words)) {
    for (std::size_t i = 0; i < words_.size(); ++i) rank_.emplace(words_[i], i + 1);
    if (rank_.size() != words_.size())
        throw std::invalid_argument("indicator vocabulary contains duplicates");
}

std::size_t IndicatorVocab::rank_of(const std::string& lowercased) const {
    auto it = rank_.find(lowercased);
    return it == rank_.end() ? 0 : it->second;
}

IndicatorVocab build_indicator_vocab(std::span<const Corpus> corpora, std::size_t n) {
    if (n == 0) throw std::invalid_argument("indicator vocabulary size must be >= 1");
    std::map<std::string, std::uint64_t> freq;
    for (const Corpus& corpus : corpora)
        for (const Sentence& sent : corpus.sentences)
            for (const Token& tok : sent.tokens) ++freq[ascii_lower(tok.surface)];
    std::vector<std::pair<std::string, std::uint64_t>> items(freq.begin(), freq.end());
    // Frequency descending; the map already put ties in lexicographic order
    // and stable_sort keeps them there.
    std::stable_sort(items.begin(), items.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    if (items.size() > n) items.resize(n);
    std::vector<std::string> words;
    words.reserve(items.size());
    for (auto& [word, count] : items) words.push_back(std::move(word));
    return IndicatorVocab(std::move(words));
}

const CountStore::Cells* CountStore::left_cells(const std::string& lowercased) const {
    auto it = left_.find(lowercased);
    return it == left_.end() ? nullptr : &it->second;
}

const CountStore::Cells* CountStore::right_cells(const std::string& lowercased) const {
    auto it = right_.find(lowercased);
    return it == right_.end() ? nullptr : &it->second;
}

void CountStore::add_left(const std::string& word, std::uint32_t cell, std::uint64_t amount) {
    add_cell(left_[word], cell, amount);
}

void CountStore::add_right(const std::string& word, std::uint32_t cell, std::uint64_t amount) {
    add_cell(right_[word], cell, amount);
}

std::uint64_t CountStore::total_count() const { return sum_cells(left_) + sum_cells(right_); }

std::uint64_t CountStore::digest() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    h = fnv1a_u64(h, n_);
    h = fnv1a_u64(h, total_tokens_seen_);
    for (const Table* table : {&left_, &right_}) {
        h = fnv1a_u64(h, table->size());
        for (const auto& [word, cells] : *table) {
            h = fnv1a(h, word.data(), word.size());
            h = fnv1a_u64(h, cells.size());
            for (const auto& [cell, count] : cells) {
                h = fnv1a_u64(h, cell);
                h = fnv1a_u64(h, count);
            }
        }
    }
    return h;
}

bool CountStore::operator==(const CountStore& other) const {
    return n_ == other.n_ && total_tokens_seen_ == other.total_tokens_seen_ &&
           left_ == other.left_ && right_ == other.right_;
}

void accumulate_counts(CountStore& store, const IndicatorVocab& vocab, const Sentence& sentence) {
    if (store.n() != vocab.size())
        throw std::invalid_argument("count store and indicator vocabulary disagree on n");
    const auto omitted = static_cast<std::uint32_t>(store.omitted_cell());
    const auto cell_for = [&](const std::string& lowercased) {
        std::size_t rank = vocab.rank_of(lowercased);
        return rank == 0 ? omitted : static_cast<std::uint32_t>(rank - 1);
    };
    const auto& toks = sentence.tokens;
    std::vector<std::string> lower;
    lower.reserve(toks.size());
    for (const Token& tok : toks) lower.push_back(ascii_lower(tok.surface));
    for (std::size_t i = 0; i < toks.size(); ++i) {
        if (i == 0)
            store.add_left(lower[i], omitted, 1);  // boundary on the left
        else
            store.add_left(lower[i], cell_for(lower[i - 1]), 1);
        if (i + 1 == toks.size())
            store.add_right(lower[i], omitted, 1);  // boundary on the right
        else
            store.add_right(lower[i], cell_for(lower[i + 1]), 1);
    }
    store.note_tokens(toks.size());
}

void accumulate_counts(CountStore& store, const IndicatorVocab& vocab, const Corpus& corpus) {
    for (const Sentence& sent : corpus.sentences) accumulate_counts(store, vocab, sent);
}

SparseVec distributional_vector(const CountStore& store, const std::string& word, Side side) {
    const std::string lowered = ascii_lower(word);
    const CountStore::Cells* cells =
        side == Side::Left ? store.left_cells(lowered) : store.right_cells(lowered);
    SparseVec vec;
    if (cells == nullptr || cells->empty()) return vec;
    vec.idx.reserve(cells->size());
    vec.val.reserve(cells->size());
    double norm_sq = 0.0;
    for (const auto& [cell, count] : *cells) {
        double w = tf_weight(count);
        vec.push(cell, w);
        norm_sq += w * w;
    }
    if (norm_sq > 0.0) {
        const double inv = 1.0 / std::sqrt(norm_sq);
        for (double& v : vec.val) v *= inv;
    }
    return vec;
}

SuffixLexicon::SuffixLexicon(std::vector<std::string> sorted_suffixes)
    : suffixes_(std::move(sorted_suffixes)) {
    for (std::size_t i = 0; i < suffixes_.size(); ++i) index_.emplace(suffixes_[i], i);
}

std::size_t SuffixLexicon::column_of(const std::string& suffix) const {
    auto it = index_.find(suffix);
    return it == index_.end() ? npos : it->second;
}

SuffixLexicon build_suffix_lexicon(std::span<const Corpus> corpora, std::size_t min_count) {
    std::map<std::string, std::uint64_t> freq;
    for (const Corpus& corpus : corpora)
        for (const Sentence& sent : corpus.sentences)
            for (const Token& tok : sent.tokens)
                for_each_suffix(tok.surface, [&](const std::string& suf) { ++freq[suf]; });
    std::vector<std::string> kept;
    for (const auto& [suf, count] : freq)
        if (count >= min_count) kept.push_back(suf);
    return SuffixLexicon(std::move(kept));  // map order is already lexicographic
}

ShapeLexicon::ShapeLexicon(std::vector<std::string> sorted_shapes)
    : shapes_(std::move(sorted_shapes)) {
    for (std::size_t i = 0; i < shapes_.size(); ++i) index_.emplace(shapes_[i], i);
}

std::size_t ShapeLexicon::column_of(const std::string& shape) const {
    auto it = index_.find(shape);
    return it == index_.end() ? unknown_column() : it->second;
}

ShapeLexicon build_shape_lexicon(std::span<const Corpus> corpora) {
    std::set<std::string> shapes;
    for (const Corpus& corpus : corpora)
        for (const Sentence& sent : corpus.sentences)
            for (const Token& tok : sent.tokens) shapes.insert(shape_of(tok.surface));
    return ShapeLexicon(std::vector<std::string>(shapes.begin(), shapes.end()));
}

WordRepresentation word_representation(const CountStore& store, const FeatureSpace& space,
                                       const std::string& word) {
    WordRepresentation rep;
    rep.left_block = distributional_vector(store, word, Side::Left);
    rep.right_block = distributional_vector(store, word, Side::Right);
    for_each_suffix(word, [&](const std::string& suf) {
        std::size_t col = space.suffix_lex->column_of(suf);
        if (col != SuffixLexicon::npos) rep.suffix_columns.push_back(static_cast<std::uint32_t>(col));
    });
    std::sort(rep.suffix_columns.begin(), rep.suffix_columns.end());
    rep.shape_column = static_cast<std::uint32_t>(space.shape_lex->column_of(shape_of(word)));
    return rep;
}

WordRepresentation boundary_representation(const FeatureSpace& space) {
    WordRepresentation rep;
    rep.shape_column = static_cast<std::uint32_t>(space.shape_lex->boundary_column());
    return rep;
}

namespace {

void append_word_block(SparseVec& out, std::size_t base, const WordRepresentation& rep,
                       const FeatureSpace& space) {
    const std::size_t dist_len = space.vocab->size() + 1;
    for (std::size_t k = 0; k < rep.left_block.nnz(); ++k)
        out.push(static_cast<std::uint32_t>(base + rep.left_block.idx[k]), rep.left_block.val[k]);
    const std::size_t right_base = base + dist_len;
    for (std::size_t k = 0; k < rep.right_block.nnz(); ++k)
        out.push(static_cast<std::uint32_t>(right_base + rep.right_block.idx[k]),
                 rep.right_block.val[k]);
    const std::size_t suffix_base = base + 2 * dist_len;
    for (std::uint32_t col : rep.suffix_columns)
        out.push(static_cast<std::uint32_t>(suffix_base + col), 1.0);
    const std::size_t shape_base = suffix_base + space.suffix_lex->size();
    out.push(static_cast<std::uint32_t>(shape_base + rep.shape_column), 1.0);
}

SparseVec assemble_window(const std::vector<const WordRepresentation*>& reps,
                          const WordRepresentation& boundary, std::ptrdiff_t i,
                          const FeatureSpace& space) {
    SparseVec out;
    const std::size_t word_dim = space.word_dim();
    const auto len = static_cast<std::ptrdiff_t>(reps.size());
    for (std::ptrdiff_t slot = 0; slot < 5; ++slot) {
        const std::ptrdiff_t j = i - 2 + slot;
        const WordRepresentation& rep =
            (j < 0 || j >= len) ? boundary : *reps[static_cast<std::size_t>(j)];
        append_word_block(out, static_cast<std::size_t>(slot) * word_dim, rep, space);
    }
    return out;
}

}  // namespace

SparseVec token_feature_vector(const Sentence& sentence, std::size_t i, const CountStore& store,
                               const FeatureSpace& space) {
    if (i >= sentence.size()) throw std::out_of_range("token index out of range");
    std::vector<WordRepresentation> owned;
    owned.reserve(sentence.size());
    std::vector<const WordRepresentation*> reps;
    reps.reserve(sentence.size());
    for (const Token& tok : sentence.tokens) {
        owned.push_back(word_representation(store, space, tok.surface));
        reps.push_back(&owned.back());
    }
    return assemble_window(reps, boundary_representation(space), static_cast<std::ptrdiff_t>(i),
                           space);
}

std::vector<SparseVec> featurize_sentence(const Sentence& sentence, const CountStore& store,
                                          const FeatureSpace& space) {
    std::unordered_map<std::string, WordRepresentation> cache;
    std::vector<const WordRepresentation*> reps;
    reps.reserve(sentence.size());
    for (const Token& tok : sentence.tokens) {
        auto it = cache.find(tok.surface);
        if (it == cache.end())
            it = cache.emplace(tok.surface, word_representation(store, space, tok.surface)).first;
        reps.push_back(&it->second);
    }
    const WordRepresentation boundary = boundary_representation(space);
    std::vector<SparseVec> out;
    out.reserve(sentence.size());
    for (std::size_t i = 0; i < sentence.size(); ++i)
        out.push_back(assemble_window(reps, boundary, static_cast<std::ptrdiff_t>(i), space));
    return out;
}

namespace {

void write_table(std::ostream& out, const CountStore::Table& table) {
    binio::write_u64(out, table.size());
    for (const auto& [word, cells] : table) {
        binio::write_string(out, word);
        binio::write_u64(out, cells.size());
        for (const auto& [cell, count] : cells) {
            binio::write_u32(out, cell);
            binio::write_u64(out, count);
        }
    }
}

void read_table(std::istream& in, CountStore& store, bool left) {
    const std::uint64_t words = binio::read_u64(in);
    for (std::uint64_t w = 0; w < words; ++w) {
        std::string word = binio::read_string(in);
        const std::uint64_t nnz = binio::read_u64(in);
        for (std::uint64_t k = 0; k < nnz; ++k) {
            std::uint32_t cell = binio::read_u32(in);
            std::uint64_t count = binio::read_u64(in);
            if (left)
                store.add_left(word, cell, count);
            else
                store.add_right(word, cell, count);
        }
    }
}

}  // namespace

void save_representations(const Representations& reps, std::ostream& out) {
    out.write(kRepMagic, sizeof(kRepMagic) - 1);
    binio::write_u32(out, kRepVersion);
    binio::write_u64(out, reps.vocab.size());
    for (const std::string& w : reps.vocab.words()) binio::write_string(out, w);
    binio::write_u64(out, reps.suffix_lex.size());
    for (const std::string& s : reps.suffix_lex.suffixes()) binio::write_string(out, s);
    binio::write_u64(out, reps.shape_lex.shapes().size());
    for (const std::string& s : reps.shape_lex.shapes()) binio::write_string(out, s);
    binio::write_u64(out, reps.store.total_tokens_seen());
    write_table(out, reps.store.left());
    write_table(out, reps.store.right());
    if (!out) throw std::runtime_error("failed writing representations");
}

void save_representations_file(const Representations& reps, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path);
    save_representations(reps, out);
}

Representations load_representations(std::istream& in) {
    binio::expect_magic(in, kRepMagic, "representations");
    const std::uint32_t version = binio::read_u32(in);
    if (version != kRepVersion)
        throw std::runtime_error("unsupported representations format version " +
                                 std::to_string(version));
    Representations reps;
    const std::uint64_t n = binio::read_u64(in);
    std::vector<std::string> words(n);
    for (auto& w : words) w = binio::read_string(in);
    reps.vocab = IndicatorVocab(std::move(words));
    const std::uint64_t n_suffix = binio::read_u64(in);
    std::vector<std::string> suffixes(n_suffix);
    for (auto& s : suffixes) s = binio::read_string(in);
    reps.suffix_lex = SuffixLexicon(std::move(suffixes));
    const std::uint64_t n_shape = binio::read_u64(in);
    std::vector<std::string> shapes(n_shape);
    for (auto& s : shapes) s = binio::read_string(in);
    reps.shape_lex = ShapeLexicon(std::move(shapes));
    reps.store = CountStore(reps.vocab.size());
    reps.store.note_tokens(binio::read_u64(in));
    read_table(in, reps.store, true);
    read_table(in, reps.store, false);
    return reps;
}

Representations load_representations_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    return load_representations(in);
}

}  // namespace flors
