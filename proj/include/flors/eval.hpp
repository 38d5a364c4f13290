#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "flors/adaptation.hpp"
#include "flors/corpus.hpp"

namespace flors {

// KN / SHFT / OOV partition the test tokens against a small and a big
// training vocabulary (small must be a subset of big). The unseen and
// unknown flags are independent of the partition.
enum class Category { KN, SHFT, OOV };

const char* category_name(Category c);

struct TokenAnnotation {
    Category partition = Category::KN;
    bool unseen = false;
    bool unknown = false;
};

// Case-sensitive surface lookups. `unseen_set` and `train_vocab` are
// optional; without them the corresponding flags stay false.
std::vector<TokenAnnotation> categorize(const Corpus& test,
                                        const std::unordered_set<std::string>& vocab_small,
                                        const std::unordered_set<std::string>& vocab_big,
                                        const std::unordered_set<std::string>* unseen_set = nullptr,
                                        const std::unordered_set<std::string>* train_vocab = nullptr);

// Words with at least one test occurrence whose gold tag never occurred with
// that word in training. Every occurrence of such a word counts toward
// unseen evaluation, including occurrences with seen tags.
std::unordered_set<std::string> unseen_words(const Corpus& train, const Corpus& test);

struct CategoryMetrics {
    std::string category;
    std::uint64_t tokens = 0;
    std::uint64_t correct = 0;

    double accuracy() const { return tokens == 0 ? 0.0 : static_cast<double>(correct) / tokens; }
    double error() const { return tokens == 0 ? 0.0 : 1.0 - accuracy(); }
};

// Fixed row order: ALL, KN, SHFT, OOV, known, unknown, unseen.
struct MetricsReport {
    std::string condition;
    std::string mode;
    std::vector<CategoryMetrics> rows;

    const CategoryMetrics& row(const std::string& category) const;
};

MetricsReport score(std::span<const std::string> predictions, std::span<const std::string> gold,
                    std::span<const TokenAnnotation> annotations);

// Flattens a labeled corpus's gold tags in token order.
std::vector<std::string> gold_tags_of(const Corpus& corpus);

struct TimeCourseBin {
    std::uint64_t bin_start = 0;  // occurrence index, inclusive
    std::uint64_t bin_end = 0;    // exclusive
    std::uint64_t tokens = 0;
    std::uint64_t errors = 0;

    double error_rate() const { return tokens == 0 ? 0.0 : static_cast<double>(errors) / tokens; }
};

struct TimeCourseCurve {
    std::string category;
    std::vector<TimeCourseBin> bins;
};

struct TimeCourse {
    std::size_t bin_width = 0;
    std::vector<TimeCourseCurve> curves;  // sorted by category label

    const TimeCourseCurve* curve(const std::string& category) const;
};

constexpr std::size_t kDefaultTimeCourseBinWidth = 500;

// Orders each category's occurrences by tagging order and bins them by
// occurrence index. Tokens with an empty label are excluded.
TimeCourse time_course(std::span<const PredictionRecord> log,
                       std::span<const std::string> category_labels, std::size_t bin_width);

struct SampleStats {
    int trials = 0;
    double fraction = 0.0;
    std::uint64_t base_seed = 0;

    struct Entry {
        std::string category;
        double mean_error = 0.0;
        double std_error = 0.0;  // sample standard deviation, divisor T-1
    };
    std::vector<Entry> rows;  // sorted by category

    const Entry& row(const std::string& category) const;
};

// Trial i receives sample_fraction(corpus, fraction, seed + i) and must run a
// fresh session, returning per-category error rates.
using TrialRunner =
    std::function<std::map<std::string, double>(const Corpus& sample, std::uint64_t trial_seed)>;

SampleStats repeated_sampling(const Corpus& corpus, const TrialRunner& runner, int trials,
                              double fraction, std::uint64_t seed);

struct ProportionTest {
    double z = 0.0;
    bool significant = false;  // two-sided p < 0.05
};

// Two-proportion z-test with pooled proportion. Degenerate pools (0 or 1)
// give z = 0, not significant.
ProportionTest equal_proportion_test(double err_a, std::uint64_t n_a, double err_b,
                                     std::uint64_t n_b);

// CSV emitters. UTF-8, header row, LF endings; column names are stable.
void write_metrics_csv(std::ostream& out, std::span<const MetricsReport> reports);
void write_time_course_csv(std::ostream& out, const std::string& condition,
                           const std::string& mode, const TimeCourse& tc, bool header);
void write_sample_stats_csv(std::ostream& out, const std::string& condition,
                            const std::string& mode, const SampleStats& stats, bool header);

}  // namespace flors
