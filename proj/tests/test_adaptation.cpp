#include "flors/adaptation.hpp"

#include <random>

#include "doctest.h"
#include "flors/rng.hpp"
#include "flors/synth.hpp"

using namespace flors;

namespace {

// Everything a session needs, built once from a small synthetic pair.
struct Fixture {
    Corpus train;
    Corpus test;
    Representations reps;
    LinearModel model;

    FeatureSpace space() const { return reps.space(); }
    Featurizer featurizer() const { return make_featurizer(reps.store, space()); }
};

Fixture make_fixture(std::uint64_t seed, std::size_t train_sentences = 120,
                     std::size_t test_sentences = 40) {
    SyntheticShiftConfig cfg;
    cfg.tag_count = 4;
    cfg.source_vocab_size = 120;
    cfg.target_vocab_size = 120;
    cfg.overlap_fraction = 0.5;
    cfg.source_sentences = train_sentences;
    cfg.target_sentences = test_sentences;
    cfg.sentence_len_min = 4;
    cfg.sentence_len_max = 10;
    cfg.seed = seed;
    Fixture fx;
    SyntheticShiftPair pair = generate_shift_pair(cfg);
    fx.train = std::move(pair.source);
    fx.test = std::move(pair.target);
    fx.reps.vocab = build_indicator_vocab({&fx.train, 1}, 50);
    fx.reps.suffix_lex = build_suffix_lexicon({&fx.train, 1}, 5);
    fx.reps.shape_lex = build_shape_lexicon({&fx.train, 1});
    fx.reps.store = CountStore(fx.reps.vocab.size());
    accumulate_counts(fx.reps.store, fx.reps.vocab, fx.train);
    TrainConfig tc;
    tc.max_epochs = 15;
    fx.model = train(fx.train, fx.featurizer(), tc);
    return fx;
}

}  // namespace

TEST_CASE("static sessions never mutate the store and tag deterministically") {
    Fixture fx = make_fixture(1);
    auto shared = std::make_shared<const CountStore>(fx.reps.store);
    TaggerSession session = TaggerSession::make_static(fx.model, fx.space(), shared);
    const std::uint64_t digest_before = shared->digest();
    std::vector<std::vector<std::string>> first_run;
    for (const Sentence& s : fx.test.sentences) first_run.push_back(session.tag_sentence(s));
    CHECK(shared->digest() == digest_before);
    // same sentence tagged twice -> identical tags
    TaggerSession session2 = TaggerSession::make_static(fx.model, fx.space(), shared);
    for (std::size_t i = 0; i < fx.test.sentences.size(); ++i)
        CHECK(session2.tag_sentence(fx.test.sentences[i]) == first_run[i]);
    CHECK(session.tokens_tagged() == fx.test.token_count());
}

TEST_CASE("online store counts strictly grow with every multi-token sentence") {
    Fixture fx = make_fixture(2);
    TaggerSession session =
        TaggerSession::make_adaptive(Mode::Online, fx.model, fx.space(), fx.reps.store);
    std::uint64_t last_total = session.store().total_count();
    for (const Sentence& s : fx.test.sentences) {
        session.tag_sentence(s);
        const std::uint64_t now = session.store().total_count();
        if (s.size() >= 2) CHECK(now > last_total);
        CHECK(now >= last_total);
        last_total = now;
    }
}

TEST_CASE("online tags each sentence with its own counts already folded in") {
    Fixture fx = make_fixture(3);
    const Sentence& first = fx.test.sentences[0];

    TaggerSession online =
        TaggerSession::make_adaptive(Mode::Online, fx.model, fx.space(), fx.reps.store);
    std::vector<std::string> online_tags = online.tag_sentence(first);

    // a static session over (base + this sentence) must agree exactly
    CountStore updated = fx.reps.store;
    accumulate_counts(updated, fx.reps.vocab, first);
    CHECK(online.store() == updated);
    TaggerSession oracle = TaggerSession::make_static(
        fx.model, fx.space(), std::make_shared<const CountStore>(std::move(updated)));
    CHECK(oracle.tag_sentence(first) == online_tags);
}

TEST_CASE("prepare_batch folds in exactly the test corpus counts") {
    Fixture fx = make_fixture(4);

    // empty test corpus: store unchanged
    TaggerSession empty_batch =
        TaggerSession::make_adaptive(Mode::Batch, fx.model, fx.space(), fx.reps.store);
    empty_batch.prepare_batch(Corpus{});
    CHECK(empty_batch.store() == fx.reps.store);

    // single-sentence test set equals one online update
    Corpus single;
    single.labeled = fx.test.labeled;
    single.sentences.push_back(fx.test.sentences[0]);
    TaggerSession batch1 =
        TaggerSession::make_adaptive(Mode::Batch, fx.model, fx.space(), fx.reps.store);
    batch1.prepare_batch(single);
    TaggerSession online1 =
        TaggerSession::make_adaptive(Mode::Online, fx.model, fx.space(), fx.reps.store);
    online1.tag_sentence(fx.test.sentences[0]);
    CHECK(batch1.store() == online1.store());

    // full test set equals base + independent tally
    TaggerSession batch =
        TaggerSession::make_adaptive(Mode::Batch, fx.model, fx.space(), fx.reps.store);
    batch.prepare_batch(fx.test);
    CountStore oracle = fx.reps.store;
    for (const Sentence& s : fx.test.sentences) accumulate_counts(oracle, fx.reps.vocab, s);
    CHECK(batch.store() == oracle);
}

TEST_CASE("prepare_batch guards: wrong mode, double call, call after tagging") {
    Fixture fx = make_fixture(5);
    TaggerSession online =
        TaggerSession::make_adaptive(Mode::Online, fx.model, fx.space(), fx.reps.store);
    CHECK_THROWS_AS(online.prepare_batch(fx.test), std::logic_error);

    TaggerSession batch =
        TaggerSession::make_adaptive(Mode::Batch, fx.model, fx.space(), fx.reps.store);
    CHECK_THROWS_AS(batch.tag_sentence(fx.test.sentences[0]), std::logic_error);
    batch.prepare_batch(fx.test);
    CHECK_THROWS_AS(batch.prepare_batch(fx.test), std::logic_error);
    batch.tag_sentence(fx.test.sentences[0]);

    CHECK_THROWS_AS(
        TaggerSession::make_adaptive(Mode::Static, fx.model, fx.space(), fx.reps.store),
        std::invalid_argument);
}

TEST_CASE("online's final store equals batch's prepared store, cell for cell") {
    std::mt19937_64 rng(909);
    for (int trial = 0; trial < 5; ++trial) {
        Fixture fx = make_fixture(100 + trial, 60, 25);
        TaggerSession online =
            TaggerSession::make_adaptive(Mode::Online, fx.model, fx.space(), fx.reps.store);
        for (const Sentence& s : fx.test.sentences) online.tag_sentence(s);
        TaggerSession batch =
            TaggerSession::make_adaptive(Mode::Batch, fx.model, fx.space(), fx.reps.store);
        batch.prepare_batch(fx.test);
        CHECK(online.store() == batch.store());
    }
}

TEST_CASE("suffix and shape blocks are mode-independent at every point in time") {
    Fixture fx = make_fixture(6);
    TaggerSession online =
        TaggerSession::make_adaptive(Mode::Online, fx.model, fx.space(), fx.reps.store);
    const FeatureSpace space = fx.space();
    for (const Sentence& s : fx.test.sentences) {
        online.tag_sentence(s);
        for (const Token& tok : s.tokens) {
            WordRepresentation before = word_representation(fx.reps.store, space, tok.surface);
            WordRepresentation after = word_representation(online.store(), space, tok.surface);
            CHECK(before.suffix_columns == after.suffix_columns);
            CHECK(before.shape_column == after.shape_column);
        }
    }
}

TEST_CASE("tag_stream is lazy, causal, and order-insensitive for static") {
    Fixture fx = make_fixture(7);

    // empty stream -> empty output
    TaggerSession session = TaggerSession::make_static(
        fx.model, fx.space(), std::make_shared<const CountStore>(fx.reps.store));
    StreamTagger empty(session, [] { return std::optional<Sentence>{}; });
    CHECK_FALSE(empty.next().has_value());

    // causality: output for sentence k matches a run over the k-prefix
    const std::size_t cut = fx.test.sentences.size() / 2;
    TaggerSession full =
        TaggerSession::make_adaptive(Mode::Online, fx.model, fx.space(), fx.reps.store);
    std::size_t cursor = 0;
    StreamTagger stream(full, [&]() -> std::optional<Sentence> {
        if (cursor >= fx.test.sentences.size()) return std::nullopt;
        return fx.test.sentences[cursor++];
    });
    std::vector<std::vector<std::string>> streamed;
    while (auto item = stream.next()) streamed.push_back(item->second);
    REQUIRE(streamed.size() == fx.test.sentences.size());

    TaggerSession prefix =
        TaggerSession::make_adaptive(Mode::Online, fx.model, fx.space(), fx.reps.store);
    for (std::size_t i = 0; i < cut; ++i)
        CHECK(prefix.tag_sentence(fx.test.sentences[i]) == streamed[i]);

    // static tags are invariant under stream permutation
    auto shared = std::make_shared<const CountStore>(fx.reps.store);
    TaggerSession forward = TaggerSession::make_static(fx.model, fx.space(), shared);
    TaggerSession backward = TaggerSession::make_static(fx.model, fx.space(), shared);
    std::vector<std::vector<std::string>> fwd;
    for (const Sentence& s : fx.test.sentences) fwd.push_back(forward.tag_sentence(s));
    for (std::size_t i = fx.test.sentences.size(); i-- > 0;)
        CHECK(backward.tag_sentence(fx.test.sentences[i]) == fwd[i]);
}

TEST_CASE("prediction log honors the retention switches") {
    Fixture fx = make_fixture(8);
    TaggerSession session = TaggerSession::make_static(
        fx.model, fx.space(), std::make_shared<const CountStore>(fx.reps.store));
    session.set_log_enabled(false);
    session.tag_sentence(fx.test.sentences[0]);
    CHECK(session.prediction_log().empty());

    TaggerSession bounded = TaggerSession::make_static(
        fx.model, fx.space(), std::make_shared<const CountStore>(fx.reps.store));
    bounded.set_log_limit(3);
    for (const Sentence& s : fx.test.sentences) bounded.tag_sentence(s);
    CHECK(bounded.prediction_log().size() == 3);

    TaggerSession logged = TaggerSession::make_static(
        fx.model, fx.space(), std::make_shared<const CountStore>(fx.reps.store));
    std::vector<std::string> tags = logged.tag_sentence(fx.test.sentences[0]);
    REQUIRE(logged.prediction_log().size() == fx.test.sentences[0].size());
    for (std::size_t i = 0; i < tags.size(); ++i) {
        const PredictionRecord& rec = logged.prediction_log()[i];
        CHECK(rec.surface == fx.test.sentences[0].tokens[i].surface);
        CHECK(rec.predicted == tags[i]);
        CHECK(rec.gold == fx.test.sentences[0].tokens[i].gold_tag);
    }
}
