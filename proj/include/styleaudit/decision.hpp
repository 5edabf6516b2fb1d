#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace styleaudit {

enum class Verdict { infringing, not_infringing };
enum class Mechanism { threshold, t_test };
enum class ScoreSource { discriminator, adapted_binary };

std::string verdict_name(Verdict v);
std::string mechanism_name(Mechanism m);

// Per-image confidence scores for one audit query.
struct ScoreSample {
    std::vector<double> scores;  // each in [-1, 1], finite
    std::string artist_id;
    ScoreSource source = ScoreSource::discriminator;

    void validate() const;  // throws TooFewScores / InvalidConfig
};

struct AuditDecision {
    Verdict verdict = Verdict::not_infringing;
    Mechanism mechanism = Mechanism::threshold;
    double mean = 0.0;
    double stddev = 0.0;  // sample stddev (n - 1); 0 when n == 1
    int n = 0;
    std::optional<double> t_statistic;
    std::optional<double> critical_t;
    double confidence_level = 0.95;
    double threshold = 0.0;
    std::string artist_id;
    std::string degenerate_code;  // "zero_stddev" when s == 0 in the t-test

    nlohmann::json to_json() const;
    std::string csv_row() const;  // artist,mechanism,n,mean,stddev,t,crit,verdict
    static std::string csv_header();
};

// Infringing iff mean(scores) > threshold; an exact tie is not infringing.
AuditDecision decide_threshold(const ScoreSample& sample, double threshold = 0.0);

// One-sided t-test of H0: mu <= 0. t = mean / (s / sqrt(n)); infringing iff
// t exceeds the upper critical value at the given confidence. s == 0 falls
// back to the sign of the mean with a recorded degenerate code. n == 1
// raises TooFewScores.
AuditDecision decide_ttest(const ScoreSample& sample, double confidence = 0.95);

enum class BinaryPrediction { positive, negative };

// positive -> +1.0, negative -> -1.0, order preserved.
ScoreSample adapt_binary(const std::vector<BinaryPrediction>& predictions,
                         const std::string& artist_id = {});

}  // namespace styleaudit
