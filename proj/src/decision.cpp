#include "styleaudit/decision.hpp"

#include <cmath>
#include <cstdio>

#include "styleaudit/errors.hpp"
#include "styleaudit/stats.hpp"

namespace styleaudit {

std::string verdict_name(Verdict v) {
    return v == Verdict::infringing ? "infringing" : "not_infringing";
}

std::string mechanism_name(Mechanism m) {
    return m == Mechanism::threshold ? "threshold" : "t_test";
}

void ScoreSample::validate() const {
    if (scores.empty()) throw TooFewScores("score sample is empty");
    for (const double c : scores) {
        if (!std::isfinite(c))
            throw InvalidConfig("non-finite confidence score");
        if (c < -1.0 || c > 1.0)
            throw InvalidConfig("confidence score outside [-1, 1]");
    }
}

namespace {

struct Moments {
    double mean;
    double stddev;  // n - 1 denominator; 0 for n == 1
};

Moments moments(const std::vector<double>& scores) {
    double sum = 0.0;
    for (const double c : scores) sum += c;
    const double mean = sum / double(scores.size());
    if (scores.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (const double c : scores) ss += (c - mean) * (c - mean);
    return {mean, std::sqrt(ss / double(scores.size() - 1))};
}

}  // namespace

AuditDecision decide_threshold(const ScoreSample& sample, double threshold) {
    sample.validate();
    const Moments m = moments(sample.scores);
    AuditDecision decision;
    decision.mechanism = Mechanism::threshold;
    decision.mean = m.mean;
    decision.stddev = m.stddev;
    decision.n = static_cast<int>(sample.scores.size());
    decision.threshold = threshold;
    decision.artist_id = sample.artist_id;
    decision.verdict =
        m.mean > threshold ? Verdict::infringing : Verdict::not_infringing;
    return decision;
}

AuditDecision decide_ttest(const ScoreSample& sample, double confidence) {
    sample.validate();
    if (!(confidence > 0.0 && confidence < 1.0))
        throw InvalidConfig("confidence level must be in (0, 1)");
    const auto n = sample.scores.size();
    if (n < 2)
        throw TooFewScores("one-sided t-test requires at least 2 scores, got " +
                           std::to_string(n));

    const Moments m = moments(sample.scores);
    AuditDecision decision;
    decision.mechanism = Mechanism::t_test;
    decision.mean = m.mean;
    decision.stddev = m.stddev;
    decision.n = static_cast<int>(n);
    decision.confidence_level = confidence;
    decision.artist_id = sample.artist_id;

    if (m.stddev == 0.0) {
        // The statistic is undefined for a constant sample; the sign of the
        // mean preserves monotonicity.
        decision.degenerate_code = "zero_stddev";
        decision.verdict =
            m.mean > 0.0 ? Verdict::infringing : Verdict::not_infringing;
        return decision;
    }

    const double t = m.mean / (m.stddev / std::sqrt(double(n)));
    const double critical =
        stats::student_t_quantile(double(n - 1), confidence);
    decision.t_statistic = t;
    decision.critical_t = critical;
    decision.verdict =
        t > critical ? Verdict::infringing : Verdict::not_infringing;
    return decision;
}

ScoreSample adapt_binary(const std::vector<BinaryPrediction>& predictions,
                         const std::string& artist_id) {
    if (predictions.empty())
        throw TooFewScores("no binary predictions to adapt");
    ScoreSample sample;
    sample.artist_id = artist_id;
    sample.source = ScoreSource::adapted_binary;
    sample.scores.reserve(predictions.size());
    for (const BinaryPrediction p : predictions)
        sample.scores.push_back(p == BinaryPrediction::positive ? 1.0 : -1.0);
    return sample;
}

nlohmann::json AuditDecision::to_json() const {
    nlohmann::json j{
        {"verdict", verdict_name(verdict)},
        {"mechanism", mechanism_name(mechanism)},
        {"mean", mean},
        {"stddev", stddev},
        {"n", n},
        {"confidence_level", confidence_level},
        {"threshold", threshold},
        {"artist_id", artist_id},
    };
    if (t_statistic) j["t_statistic"] = *t_statistic;
    if (critical_t) j["critical_t"] = *critical_t;
    if (!degenerate_code.empty()) j["degenerate_code"] = degenerate_code;
    return j;
}

std::string AuditDecision::csv_header() {
    return "artist_id,mechanism,n,mean,stddev,t,critical_t,verdict";
}

std::string AuditDecision::csv_row() const {
    char buf[256];
    char tbuf[32] = "";
    char cbuf[32] = "";
    if (t_statistic) std::snprintf(tbuf, sizeof(tbuf), "%.6g", *t_statistic);
    if (critical_t) std::snprintf(cbuf, sizeof(cbuf), "%.6g", *critical_t);
    std::snprintf(buf, sizeof(buf), "%s,%s,%d,%.6g,%.6g,%s,%s,%s",
                  artist_id.c_str(), mechanism_name(mechanism).c_str(), n,
                  mean, stddev, tbuf, cbuf, verdict_name(verdict).c_str());
    return buf;
}

}  // namespace styleaudit
