// Command-line surface for the flors tagging library: corpus synthesis,
// representation building, training, streaming tagging and the experiment
// harness.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "flors/adaptation.hpp"
#include "flors/classifier.hpp"
#include "flors/corpus.hpp"
#include "flors/eval.hpp"
#include "flors/features.hpp"
#include "flors/synth.hpp"

namespace {

using namespace flors;

struct RepOptions {
    std::vector<std::string> labeled_paths;
    std::vector<std::string> unlabeled_paths;
    std::size_t n_indicators = 500;
    std::size_t suffix_min_count = kDefaultSuffixMinCount;
};

struct TrainOptions {
    double regularization = 1.0;
    double tolerance = 1e-4;
    int epochs = 50;
    std::uint64_t seed = 0;

    TrainConfig config() const {
        TrainConfig c;
        c.regularization_strength = regularization;
        c.convergence_tolerance = tolerance;
        c.max_epochs = epochs;
        c.seed = seed;
        return c;
    }
};

void add_rep_options(CLI::App* cmd, RepOptions& opts, bool require_labeled) {
    auto* labeled = cmd->add_option("--labeled", opts.labeled_paths,
                                    "Labeled corpora (surface<TAB>tag, blank-line separated)");
    if (require_labeled) labeled->required();
    cmd->add_option("--unlabeled", opts.unlabeled_paths,
                    "Unlabeled corpora (one sentence per line)");
    cmd->add_option("--n-indicators", opts.n_indicators, "Indicator vocabulary size")
        ->default_val(std::size_t{500});
    cmd->add_option("--suffix-min-count", opts.suffix_min_count,
                    "Minimum occurrences for a suffix column")
        ->default_val(kDefaultSuffixMinCount);
}

void add_train_options(CLI::App* cmd, TrainOptions& opts) {
    cmd->add_option("--reg", opts.regularization, "L2 regularization strength")
        ->default_val(1.0);
    cmd->add_option("--tol", opts.tolerance, "Convergence tolerance on objective decrease")
        ->default_val(1e-4);
    cmd->add_option("--epochs", opts.epochs, "Maximum training epochs")->default_val(50);
    cmd->add_option("--seed", opts.seed, "Training seed")->default_val(std::uint64_t{0});
}

Representations build_reps(const RepOptions& opts) {
    std::vector<Corpus> corpora;
    for (const std::string& path : opts.labeled_paths)
        corpora.push_back(read_labeled_file(path));
    for (const std::string& path : opts.unlabeled_paths)
        corpora.push_back(read_unlabeled_file(path));
    if (corpora.empty()) throw std::runtime_error("no representation corpora given");
    Representations reps;
    reps.vocab = build_indicator_vocab(corpora, opts.n_indicators);
    reps.suffix_lex = build_suffix_lexicon(corpora, opts.suffix_min_count);
    reps.shape_lex = build_shape_lexicon(corpora);
    reps.store = CountStore(reps.vocab.size());
    for (const Corpus& corpus : corpora) accumulate_counts(reps.store, reps.vocab, corpus);
    return reps;
}

void check_dimensions(const LinearModel& model, const Representations& reps) {
    if (model.feature_dim() != reps.space().dim())
        throw std::runtime_error(
            "model and store disagree on feature dimensionality (" +
            std::to_string(model.feature_dim()) + " vs " + std::to_string(reps.space().dim()) +
            "); they were built from different representations");
}

std::unique_ptr<std::istream> open_input(const std::string& path) {
    if (path == "-") return nullptr;  // caller uses std::cin
    auto in = std::make_unique<std::ifstream>(path, std::ios::binary);
    if (!*in) throw std::runtime_error("cannot open file: " + path);
    return in;
}

std::unique_ptr<std::ostream> open_output(const std::string& path) {
    if (path == "-") return nullptr;  // caller uses std::cout
    auto out = std::make_unique<std::ofstream>(path, std::ios::binary);
    if (!*out) throw std::runtime_error("cannot open file for writing: " + path);
    return out;
}

int cmd_synth(const SyntheticShiftConfig& cfg, const std::string& source_out,
              const std::string& target_out) {
    SyntheticShiftPair pair = generate_shift_pair(cfg);
    write_labeled_file(pair.source, source_out);
    write_labeled_file(pair.target, target_out);
    std::cerr << "synth: wrote " << pair.source.sentences.size() << " source and "
              << pair.target.sentences.size() << " target sentences\n";
    return 0;
}

int cmd_build_reps(const RepOptions& opts, const std::string& store_out) {
    Representations reps = build_reps(opts);
    save_representations_file(reps, store_out);
    std::cerr << "build-reps: n=" << reps.vocab.size() << " suffixes=" << reps.suffix_lex.size()
              << " shapes=" << reps.shape_lex.size()
              << " total-count=" << reps.store.total_count() << " -> " << store_out << "\n";
    return 0;
}

int cmd_train(const std::string& train_path, const std::string& store_path,
              const std::string& model_out, const TrainOptions& opts) {
    const Corpus corpus = read_labeled_file(train_path);
    const Representations reps = load_representations_file(store_path);
    const FeatureSpace space = reps.space();
    TrainDiagnostics diag;
    const LinearModel model =
        train(corpus, make_featurizer(reps.store, space), opts.config(), &diag);
    save_model_file(model, model_out);
    std::size_t max_epochs_used = 0;
    for (const auto& trace : diag.objective_per_epoch)
        max_epochs_used = std::max(max_epochs_used, trace.empty() ? 0 : trace.size() - 1);
    std::cerr << "train: tags=" << model.tag_order().size() << " dim=" << model.feature_dim()
              << " epochs<=" << max_epochs_used << " -> " << model_out << "\n";
    if (model.single_tag_warning())
        std::cerr << "train: warning: corpus has a single tag; model is trivial\n";
    return 0;
}

int cmd_tag(const std::string& model_path, const std::string& store_path, const std::string& mode_name,
            const std::string& input_path, const std::string& output_path,
            const std::string& write_store_path) {
    const Mode mode = parse_mode(mode_name);
    const LinearModel model = load_model_file(model_path);
    Representations reps = load_representations_file(store_path);
    check_dimensions(model, reps);
    const FeatureSpace space = reps.space();

    auto input_holder = open_input(input_path);
    std::istream& in = input_holder ? *input_holder : std::cin;
    auto output_holder = open_output(output_path);
    std::ostream& out = output_holder ? *output_holder : std::cout;

    const auto emit = [&out](const Sentence& sent, const std::vector<std::string>& tags) {
        for (std::size_t i = 0; i < sent.size(); ++i)
            out << sent.tokens[i].surface << '\t' << tags[i] << '\n';
        out << '\n';
    };

    if (mode == Mode::Batch) {
        // batch needs the whole test set before tagging starts
        Corpus test;
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (auto sent = parse_unlabeled_line(line)) test.sentences.push_back(std::move(*sent));
        }
        TaggerSession session =
            TaggerSession::make_adaptive(Mode::Batch, model, space, std::move(reps.store));
        session.set_log_enabled(false);
        session.prepare_batch(test);
        for (const Sentence& sent : test.sentences) emit(sent, session.tag_sentence(sent));
        if (!write_store_path.empty()) {
            Representations updated{reps.vocab, reps.suffix_lex, reps.shape_lex, session.store()};
            save_representations_file(updated, write_store_path);
        }
        return 0;
    }

    auto shared = std::make_shared<const CountStore>(std::move(reps.store));
    TaggerSession session =
        mode == Mode::Static
            ? TaggerSession::make_static(model, space, shared)
            : TaggerSession::make_adaptive(Mode::Online, model, space, CountStore(*shared));
    session.set_log_enabled(false);
    std::string line;
    StreamTagger stream(session, [&]() -> std::optional<Sentence> {
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (auto sent = parse_unlabeled_line(line)) return sent;
        }
        return std::nullopt;
    });
    while (auto item = stream.next()) emit(item->first, item->second);
    if (!write_store_path.empty()) {
        Representations updated{reps.vocab, reps.suffix_lex, reps.shape_lex, session.store()};
        save_representations_file(updated, write_store_path);
    }
    return 0;
}

struct ExperimentOptions {
    std::string train_path;
    std::string test_path;
    std::string vocab_small_path;  // optional; defaults to the training set
    std::string vocab_big_path;    // optional; defaults to the training set
    RepOptions reps;
    TrainOptions train;
    std::string condition;  // free-form label; derived from inputs if empty
    int trials = 20;
    double fraction = 0.5;
    std::size_t bin_width = kDefaultTimeCourseBinWidth;
    std::string out_dir = ".";
};

std::vector<std::string> facet_labels(const std::vector<TokenAnnotation>& annotations,
                                      const std::string& facet) {
    std::vector<std::string> labels;
    labels.reserve(annotations.size());
    for (const TokenAnnotation& a : annotations) {
        bool in;
        if (facet == "unknown")
            in = a.unknown;
        else if (facet == "known")
            in = !a.unknown;
        else
            in = a.unseen;
        labels.push_back(in ? facet : std::string());
    }
    return labels;
}

std::map<std::string, double> error_map(const MetricsReport& report) {
    std::map<std::string, double> errors;
    for (const CategoryMetrics& row : report.rows)
        if (row.tokens > 0) errors[row.category] = row.error();
    return errors;
}

int cmd_experiment(ExperimentOptions opts) {
    const Corpus train_corpus = read_labeled_file(opts.train_path);
    const Corpus test_corpus = read_labeled_file(opts.test_path);

    // representation corpora: the training set plus any extra configured
    // text; the test set is deliberately not part of them
    opts.reps.labeled_paths.insert(opts.reps.labeled_paths.begin(), opts.train_path);
    Representations reps = build_reps(opts.reps);
    const FeatureSpace space = reps.space();

    if (opts.condition.empty())
        opts.condition = opts.reps.unlabeled_paths.empty() ? "u:0" : "u:big";

    const LinearModel model =
        train(train_corpus, make_featurizer(reps.store, space), opts.train.config());

    const auto train_vocab = vocabulary_of(train_corpus);
    const auto vocab_small = opts.vocab_small_path.empty()
                                 ? train_vocab
                                 : vocabulary_of(read_labeled_file(opts.vocab_small_path));
    const auto vocab_big = opts.vocab_big_path.empty()
                               ? train_vocab
                               : vocabulary_of(read_labeled_file(opts.vocab_big_path));
    const auto unseen = unseen_words(train_corpus, test_corpus);
    const std::vector<TokenAnnotation> annotations =
        categorize(test_corpus, vocab_small, vocab_big, &unseen, &train_vocab);
    const std::vector<std::string> gold = gold_tags_of(test_corpus);

    auto base_store = std::make_shared<const CountStore>(reps.store);
    const auto make_session = [&](Mode mode) {
        if (mode == Mode::Static) return TaggerSession::make_static(model, space, base_store);
        return TaggerSession::make_adaptive(mode, model, space, CountStore(*base_store));
    };

    std::vector<MetricsReport> reports;
    std::filesystem::create_directories(opts.out_dir);
    std::ofstream tc_out(opts.out_dir + "/timecourse.csv", std::ios::binary);
    bool tc_header = true;
    for (Mode mode : {Mode::Static, Mode::Batch, Mode::Online}) {
        TaggerSession session = make_session(mode);
        if (mode == Mode::Batch) session.prepare_batch(test_corpus);
        std::vector<std::string> predictions;
        predictions.reserve(test_corpus.token_count());
        for (const Sentence& sent : test_corpus.sentences)
            for (std::string& tag : session.tag_sentence(sent)) predictions.push_back(std::move(tag));

        MetricsReport report = score(predictions, gold, annotations);
        report.condition = opts.condition;
        report.mode = mode_name(mode);
        reports.push_back(report);

        TimeCourse combined;
        combined.bin_width = opts.bin_width;
        for (const std::string& facet : {"unknown", "unseen", "known"}) {
            TimeCourse tc = time_course(session.prediction_log(),
                                        facet_labels(annotations, facet), opts.bin_width);
            for (TimeCourseCurve& curve : tc.curves) combined.curves.push_back(std::move(curve));
        }
        write_time_course_csv(tc_out, opts.condition, mode_name(mode), combined, tc_header);
        tc_header = false;
    }

    std::ofstream metrics_out(opts.out_dir + "/metrics.csv", std::ios::binary);
    write_metrics_csv(metrics_out, reports);

    // pairwise equal-proportion tests on the full-run error rates
    std::ofstream sig_out(opts.out_dir + "/significance.csv", std::ios::binary);
    sig_out << "condition,category,mode_a,mode_b,err_a,n_a,err_b,n_b,z,significant\n";
    for (std::size_t a = 0; a < reports.size(); ++a) {
        for (std::size_t b = a + 1; b < reports.size(); ++b) {
            for (const CategoryMetrics& row : reports[a].rows) {
                const CategoryMetrics& other = reports[b].row(row.category);
                if (row.tokens == 0 || other.tokens == 0) continue;
                const ProportionTest t =
                    equal_proportion_test(row.error(), row.tokens, other.error(), other.tokens);
                sig_out << opts.condition << ',' << row.category << ',' << reports[a].mode << ','
                        << reports[b].mode << ',' << std::fixed << std::setprecision(6)
                        << row.error() << ',' << row.tokens << ',' << other.error() << ','
                        << other.tokens << ',' << t.z << ',' << (t.significant ? 1 : 0) << '\n';
            }
        }
    }

    if (opts.trials >= 2) {
        std::ofstream samples_out(opts.out_dir + "/samples.csv", std::ios::binary);
        bool header = true;
        for (Mode mode : {Mode::Static, Mode::Batch, Mode::Online}) {
            const auto runner = [&](const Corpus& sample, std::uint64_t) {
                TaggerSession session = make_session(mode);
                session.set_log_enabled(false);
                if (mode == Mode::Batch) session.prepare_batch(sample);
                std::vector<std::string> predictions;
                predictions.reserve(sample.token_count());
                for (const Sentence& sent : sample.sentences)
                    for (std::string& tag : session.tag_sentence(sent))
                        predictions.push_back(std::move(tag));
                const auto sample_ann =
                    categorize(sample, vocab_small, vocab_big, &unseen, &train_vocab);
                return error_map(score(predictions, gold_tags_of(sample), sample_ann));
            };
            SampleStats stats = repeated_sampling(test_corpus, runner, opts.trials, opts.fraction,
                                                  opts.train.seed);
            write_sample_stats_csv(samples_out, opts.condition, mode_name(mode), stats, header);
            header = false;
        }
    }

    std::cerr << "experiment: wrote metrics.csv, timecourse.csv, significance.csv"
              << (opts.trials >= 2 ? ", samples.csv" : "") << " under " << opts.out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"flors: streaming part-of-speech tagger with online domain adaptation"};
    app.require_subcommand(1);
    app.set_config("--config", "",
                   "Config file: flat `command.option=value` lines; command-line flags win");

    // synth
    SyntheticShiftConfig synth_cfg;
    std::string synth_source_out = "source.tsv";
    std::string synth_target_out = "target.tsv";
    CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic domain-shift corpus pair");
    synth->add_option("--tags", synth_cfg.tag_count, "Tag inventory size")->default_val(8);
    synth->add_option("--source-vocab", synth_cfg.source_vocab_size, "Source word types")
        ->default_val(1600);
    synth->add_option("--target-vocab", synth_cfg.target_vocab_size, "Target word types")
        ->default_val(1600);
    synth->add_option("--overlap", synth_cfg.overlap_fraction,
                      "Fraction of target types shared with the source")
        ->default_val(0.5);
    synth->add_option("--source-sentences", synth_cfg.source_sentences, "Source sentences")
        ->default_val(2000);
    synth->add_option("--target-sentences", synth_cfg.target_sentences, "Target sentences")
        ->default_val(600);
    synth->add_option("--len-min", synth_cfg.sentence_len_min, "Minimum sentence length")
        ->default_val(8);
    synth->add_option("--len-max", synth_cfg.sentence_len_max, "Maximum sentence length")
        ->default_val(20);
    synth->add_option("--suffix-fidelity", synth_cfg.suffix_fidelity,
                      "P(word carries its own tag's suffix)")
        ->default_val(0.55);
    synth->add_option("--next-tag-fidelity", synth_cfg.next_tag_fidelity,
                      "P(tag transition follows the cycle)")
        ->default_val(0.75);
    synth->add_option("--emission-noise", synth_cfg.emission_noise,
                      "P(word borrowed from another tag)")
        ->default_val(0.03);
    synth->add_option("--seed", synth_cfg.seed, "Generator seed")->default_val(std::uint64_t{1});
    synth->add_option("--source-out", synth_source_out, "Source corpus output path")
        ->default_val("source.tsv");
    synth->add_option("--target-out", synth_target_out, "Target corpus output path")
        ->default_val("target.tsv");

    // build-reps
    RepOptions rep_opts;
    std::string store_out = "reps.bin";
    CLI::App* build = app.add_subcommand(
        "build-reps", "Build indicator vocabulary, lexicons and count store");
    add_rep_options(build, rep_opts, false);
    build->add_option("--store", store_out, "Store output path")->default_val("reps.bin");

    // train
    std::string train_corpus_path, train_store_path, model_out = "model.bin";
    TrainOptions train_opts;
    CLI::App* train_cmd = app.add_subcommand("train", "Train the one-vs-rest linear model");
    train_cmd->add_option("--train", train_corpus_path, "Labeled training corpus")->required();
    train_cmd->add_option("--store", train_store_path, "Representations store path")->required();
    train_cmd->add_option("--model", model_out, "Model output path")->default_val("model.bin");
    add_train_options(train_cmd, train_opts);

    // tag
    std::string tag_model, tag_store, tag_mode = "static", tag_input = "-", tag_output = "-";
    std::string tag_write_store;
    CLI::App* tag = app.add_subcommand("tag", "Tag a token stream");
    tag->add_option("--model", tag_model, "Model path")->required();
    tag->add_option("--store", tag_store, "Representations store path")->required();
    tag->add_option("--mode", tag_mode, "static|batch|online")->default_val("static");
    tag->add_option("--input", tag_input, "Input path or - for stdin")->default_val("-");
    tag->add_option("--out", tag_output, "Output path or - for stdout")->default_val("-");
    tag->add_option("--write-store", tag_write_store,
                    "Write the end-of-stream store back to this path");

    // experiment
    ExperimentOptions exp;
    CLI::App* experiment =
        app.add_subcommand("experiment", "Run static/batch/online and emit CSV reports");
    experiment->add_option("--train", exp.train_path, "Labeled training corpus")->required();
    experiment->add_option("--test", exp.test_path, "Labeled test corpus")->required();
    experiment->add_option("--vocab-small", exp.vocab_small_path,
                           "Labeled corpus defining the small vocabulary (default: --train)");
    experiment->add_option("--vocab-big", exp.vocab_big_path,
                           "Labeled corpus defining the big vocabulary (default: --train)");
    add_rep_options(experiment, exp.reps, false);
    add_train_options(experiment, exp.train);
    experiment->add_option("--condition", exp.condition, "Condition label for the CSV rows");
    experiment->add_option("--trials", exp.trials, "Repeated-sampling trial count (< 2 disables)")
        ->default_val(20);
    experiment->add_option("--fraction", exp.fraction, "Repeated-sampling fraction")
        ->default_val(0.5);
    experiment->add_option("--bin-width", exp.bin_width, "Time-course bin width")
        ->default_val(kDefaultTimeCourseBinWidth);
    experiment->add_option("--out", exp.out_dir, "Output directory for the CSV reports")
        ->default_val(".");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) return cmd_synth(synth_cfg, synth_source_out, synth_target_out);
        if (build->parsed()) return cmd_build_reps(rep_opts, store_out);
        if (train_cmd->parsed())
            return cmd_train(train_corpus_path, train_store_path, model_out, train_opts);
        if (tag->parsed())
            return cmd_tag(tag_model, tag_store, tag_mode, tag_input, tag_output, tag_write_store);
        if (experiment->parsed()) return cmd_experiment(std::move(exp));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
