#include "styleaudit/metrics.hpp"

#include <cmath>

#include "styleaudit/errors.hpp"

namespace styleaudit {

ConfusionCounts confusion(const std::vector<BinaryOutcome>& outcomes) {
    ConfusionCounts c;
    for (const auto& o : outcomes) {
        if (o.actual)
            o.predicted ? ++c.tp : ++c.fn;
        else
            o.predicted ? ++c.fp : ++c.tn;
    }
    return c;
}

double accuracy(const ConfusionCounts& c) {
    const int total = c.tp + c.fp + c.tn + c.fn;
    if (total == 0) throw DegenerateGroundTruth("no outcomes");
    return double(c.tp + c.tn) / total;
}

double f1_score(const ConfusionCounts& c) {
    const int denom = 2 * c.tp + c.fp + c.fn;
    if (denom == 0) return 0.0;
    return 2.0 * c.tp / denom;
}

double false_positive_rate(const ConfusionCounts& c) {
    const int negatives = c.fp + c.tn;
    if (negatives == 0)
        throw DegenerateGroundTruth("no actual-negative artists");
    return double(c.fp) / negatives;
}

double auc(const std::vector<double>& scores, const std::vector<bool>& labels) {
    if (scores.size() != labels.size())
        throw InvalidConfig("auc: scores/labels length mismatch");
    double wins = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!labels[i]) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j]) continue;
            ++pairs;
            if (scores[i] > scores[j])
                wins += 1.0;
            else if (scores[i] == scores[j])
                wins += 0.5;
        }
    }
    if (pairs == 0)
        throw DegenerateGroundTruth("auc needs >= 1 positive and >= 1 negative");
    return wins / double(pairs);
}

double mean_of(const std::vector<double>& values) {
    double sum = 0.0;
    for (const double v : values) sum += v;
    return values.empty() ? 0.0 : sum / double(values.size());
}

double stddev_of(const std::vector<double>& values) {
    if (values.size() < 2) return 0.0;
    const double mean = mean_of(values);
    double ss = 0.0;
    for (const double v : values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / double(values.size() - 1));
}

}  // namespace styleaudit
