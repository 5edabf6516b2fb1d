#pragma once

#include <vector>

namespace styleaudit {

struct BinaryOutcome {
    bool actual = false;     // ground truth: pirated?
    bool predicted = false;  // verdict: infringing?
};

struct ConfusionCounts {
    int tp = 0, fp = 0, tn = 0, fn = 0;
};

ConfusionCounts confusion(const std::vector<BinaryOutcome>& outcomes);

double accuracy(const ConfusionCounts& c);
double f1_score(const ConfusionCounts& c);           // infringing = positive
double false_positive_rate(const ConfusionCounts& c);

// Rank AUC over per-artist scores against ground truth; ties count 1/2.
double auc(const std::vector<double>& scores, const std::vector<bool>& labels);

double mean_of(const std::vector<double>& values);
double stddev_of(const std::vector<double>& values);  // n - 1 denominator

}  // namespace styleaudit
