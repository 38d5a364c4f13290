#include "flors/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>
#include <unordered_map>

namespace flors {

namespace {

constexpr double kZCritical = 1.959963984540054;  // two-sided 0.05

std::ostream& rate(std::ostream& out, double v) {
    return out << std::fixed << std::setprecision(6) << v;
}

}  // namespace

const char* category_name(Category c) {
    switch (c) {
        case Category::KN: return "KN";
        case Category::SHFT: return "SHFT";
        case Category::OOV: return "OOV";
    }
    return "?";
}

std::vector<TokenAnnotation> categorize(const Corpus& test,
                                        const std::unordered_set<std::string>& vocab_small,
                                        const std::unordered_set<std::string>& vocab_big,
                                        const std::unordered_set<std::string>* unseen_set,
                                        const std::unordered_set<std::string>* train_vocab) {
    for (const std::string& w : vocab_small)
        if (!vocab_big.contains(w))
            throw std::invalid_argument("vocab_small must be a subset of vocab_big");
    std::vector<TokenAnnotation> out;
    out.reserve(test.token_count());
    for (const Sentence& sent : test.sentences) {
        for (const Token& tok : sent.tokens) {
            TokenAnnotation a;
            const bool in_big = vocab_big.contains(tok.surface);
            const bool in_small = in_big && vocab_small.contains(tok.surface);
            a.partition = in_small ? Category::KN : (in_big ? Category::SHFT : Category::OOV);
            if (unseen_set) a.unseen = unseen_set->contains(tok.surface);
            if (train_vocab) a.unknown = !train_vocab->contains(tok.surface);
            out.push_back(a);
        }
    }
    return out;
}

std::unordered_set<std::string> unseen_words(const Corpus& train, const Corpus& test) {
    if (!train.labeled || !test.labeled)
        throw std::invalid_argument("unseen_words requires labeled corpora");
    std::unordered_map<std::string, std::unordered_set<std::string>> train_tags;
    for (const Sentence& sent : train.sentences)
        for (const Token& tok : sent.tokens) train_tags[tok.surface].insert(*tok.gold_tag);
    std::unordered_set<std::string> unseen;
    for (const Sentence& sent : test.sentences) {
        for (const Token& tok : sent.tokens) {
            auto it = train_tags.find(tok.surface);
            if (it == train_tags.end() || !it->second.contains(*tok.gold_tag))
                unseen.insert(tok.surface);
        }
    }
    return unseen;
}

const CategoryMetrics& MetricsReport::row(const std::string& category) const {
    for (const CategoryMetrics& r : rows)
        if (r.category == category) return r;
    throw std::out_of_range("no such category row: " + category);
}

MetricsReport score(std::span<const std::string> predictions, std::span<const std::string> gold,
                    std::span<const TokenAnnotation> annotations) {
    if (predictions.size() != gold.size() || predictions.size() != annotations.size())
        throw std::invalid_argument("predictions, gold and annotations must align");
    MetricsReport report;
    report.rows = {{"ALL"}, {"KN"}, {"SHFT"}, {"OOV"}, {"known"}, {"unknown"}, {"unseen"}};
    auto& all = report.rows[0];
    auto& kn = report.rows[1];
    auto& shft = report.rows[2];
    auto& oov = report.rows[3];
    auto& known = report.rows[4];
    auto& unknown = report.rows[5];
    auto& unseen = report.rows[6];
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const std::uint64_t ok = predictions[i] == gold[i] ? 1 : 0;
        auto bump = [&](CategoryMetrics& m) {
            ++m.tokens;
            m.correct += ok;
        };
        bump(all);
        switch (annotations[i].partition) {
            case Category::KN: bump(kn); break;
            case Category::SHFT: bump(shft); break;
            case Category::OOV: bump(oov); break;
        }
        bump(annotations[i].unknown ? unknown : known);
        if (annotations[i].unseen) bump(unseen);
    }
    return report;
}

std::vector<std::string> gold_tags_of(const Corpus& corpus) {
    std::vector<std::string> out;
    out.reserve(corpus.token_count());
    for (const Sentence& sent : corpus.sentences)
        for (const Token& tok : sent.tokens) {
            if (!tok.gold_tag) throw std::invalid_argument("token without gold tag");
            out.push_back(*tok.gold_tag);
        }
    return out;
}

const TimeCourseCurve* TimeCourse::curve(const std::string& category) const {
    for (const TimeCourseCurve& c : curves)
        if (c.category == category) return &c;
    return nullptr;
}

TimeCourse time_course(std::span<const PredictionRecord> log,
                       std::span<const std::string> category_labels, std::size_t bin_width) {
    if (log.size() != category_labels.size())
        throw std::invalid_argument("log and category labels must align");
    if (bin_width == 0) throw std::invalid_argument("bin width must be positive");
    std::map<std::string, TimeCourseCurve> curves;
    std::map<std::string, std::uint64_t> occurrence;
    for (std::size_t i = 0; i < log.size(); ++i) {
        const std::string& label = category_labels[i];
        if (label.empty()) continue;
        if (!log[i].gold)
            throw std::invalid_argument("time course needs gold tags in the prediction log");
        const std::uint64_t index = occurrence[label]++;
        TimeCourseCurve& curve = curves[label];
        if (curve.bins.empty() || index >= curve.bins.back().bin_end) {
            curve.category = label;
            curve.bins.push_back(TimeCourseBin{index, index + bin_width, 0, 0});
        }
        TimeCourseBin& bin = curve.bins.back();
        ++bin.tokens;
        bin.errors += log[i].predicted == *log[i].gold ? 0 : 1;
    }
    TimeCourse tc;
    tc.bin_width = bin_width;
    for (auto& [label, curve] : curves) {
        // Trim the open last bin to the occurrences actually seen.
        if (!curve.bins.empty())
            curve.bins.back().bin_end = curve.bins.back().bin_start + curve.bins.back().tokens;
        tc.curves.push_back(std::move(curve));
    }
    return tc;
}

const SampleStats::Entry& SampleStats::row(const std::string& category) const {
    for (const Entry& r : rows)
        if (r.category == category) return r;
    throw std::out_of_range("no such category row: " + category);
}

SampleStats repeated_sampling(const Corpus& corpus, const TrialRunner& runner, int trials,
                              double fraction, std::uint64_t seed) {
    if (trials < 2) throw std::invalid_argument("repeated sampling needs at least 2 trials");
    std::map<std::string, std::vector<double>> per_category;
    for (int t = 0; t < trials; ++t) {
        const std::uint64_t trial_seed = seed + static_cast<std::uint64_t>(t);
        const Corpus sample = sample_fraction(corpus, fraction, trial_seed);
        for (const auto& [category, err] : runner(sample, trial_seed))
            per_category[category].push_back(err);
    }
    SampleStats stats;
    stats.trials = trials;
    stats.fraction = fraction;
    stats.base_seed = seed;
    for (const auto& [category, errs] : per_category) {
        if (static_cast<int>(errs.size()) != trials)
            throw std::logic_error("trial runner returned inconsistent categories");
        double mean = 0.0;
        for (double e : errs) mean += e;
        mean /= errs.size();
        // identical trials have exactly zero deviation; do not let the
        // accumulated mean's rounding manufacture a tiny spurious std
        const auto [lo, hi] = std::minmax_element(errs.begin(), errs.end());
        double std_dev = 0.0;
        if (*lo != *hi) {
            double ss = 0.0;
            for (double e : errs) ss += (e - mean) * (e - mean);
            std_dev = std::sqrt(ss / (errs.size() - 1));
        } else {
            mean = *lo;
        }
        stats.rows.push_back(SampleStats::Entry{category, mean, std_dev});
    }
    return stats;
}

ProportionTest equal_proportion_test(double err_a, std::uint64_t n_a, double err_b,
                                     std::uint64_t n_b) {
    if (err_a < 0.0 || err_a > 1.0 || err_b < 0.0 || err_b > 1.0)
        throw std::invalid_argument("proportions must lie in [0, 1]");
    if (n_a == 0 || n_b == 0) throw std::invalid_argument("sample sizes must be >= 1");
    const double na = static_cast<double>(n_a);
    const double nb = static_cast<double>(n_b);
    const double pooled = (err_a * na + err_b * nb) / (na + nb);
    if (pooled <= 0.0 || pooled >= 1.0) return ProportionTest{0.0, false};
    const double se = std::sqrt(pooled * (1.0 - pooled) * (1.0 / na + 1.0 / nb));
    const double z = (err_a - err_b) / se;
    return ProportionTest{z, std::abs(z) > kZCritical};
}

void write_metrics_csv(std::ostream& out, std::span<const MetricsReport> reports) {
    out << "condition,mode,category,tokens,correct,accuracy,error\n";
    for (const MetricsReport& report : reports) {
        for (const CategoryMetrics& r : report.rows) {
            out << report.condition << ',' << report.mode << ',' << r.category << ',' << r.tokens
                << ',' << r.correct << ',';
            rate(out, r.accuracy()) << ',';
            rate(out, r.error()) << '\n';
        }
    }
}

void write_time_course_csv(std::ostream& out, const std::string& condition,
                           const std::string& mode, const TimeCourse& tc, bool header) {
    if (header) out << "condition,mode,category,bin_start,bin_end,tokens,errors,error_rate\n";
    for (const TimeCourseCurve& curve : tc.curves) {
        for (const TimeCourseBin& bin : curve.bins) {
            out << condition << ',' << mode << ',' << curve.category << ',' << bin.bin_start << ','
                << bin.bin_end << ',' << bin.tokens << ',' << bin.errors << ',';
            rate(out, bin.error_rate()) << '\n';
        }
    }
}

void write_sample_stats_csv(std::ostream& out, const std::string& condition,
                            const std::string& mode, const SampleStats& stats, bool header) {
    if (header) out << "condition,mode,category,trials,fraction,mean_error,std_error\n";
    for (const SampleStats::Entry& r : stats.rows) {
        out << condition << ',' << mode << ',' << r.category << ',' << stats.trials << ',';
        rate(out, stats.fraction) << ',';
        rate(out, r.mean_error) << ',';
        rate(out, r.std_error) << '\n';
    }
}

}  // namespace flors
