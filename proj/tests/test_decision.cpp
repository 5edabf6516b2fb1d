#include <cmath>
#include <vector>

#include <doctest.h>

#include "styleaudit/decision.hpp"
#include "styleaudit/errors.hpp"
#include "styleaudit/rng.hpp"
#include "styleaudit/stats.hpp"

using namespace styleaudit;

namespace {

// ---- Independent t-distribution oracle -----------------------------------
// CDF via adaptive Simpson quadrature of the density, quantile via
// bisection. Shares no code with stats.cpp (which goes through the
// regularized incomplete beta).

double t_pdf(double df, double x) {
    const double c = std::lgamma((df + 1.0) / 2.0) - std::lgamma(df / 2.0) -
                     0.5 * std::log(df * 3.14159265358979323846);
    return std::exp(c - (df + 1.0) / 2.0 * std::log1p(x * x / df));
}

double simpson(double df, double a, double b, double fa, double fm, double fb,
               double eps, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = t_pdf(df, lm), frm = t_pdf(df, rm);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::fabs(left + right - whole) < 15.0 * eps)
        return left + right + (left + right - whole) / 15.0;
    return simpson(df, a, m, fa, flm, fm, eps / 2.0, depth - 1) +
           simpson(df, m, b, fm, frm, fb, eps / 2.0, depth - 1);
}

double oracle_cdf(double df, double t) {
    if (t == 0.0) return 0.5;
    const double a = 0.0, b = std::fabs(t);
    const double integral = simpson(df, a, b, t_pdf(df, a),
                                    t_pdf(df, 0.5 * (a + b)), t_pdf(df, b),
                                    1e-12, 40);
    return t > 0.0 ? 0.5 + integral : 0.5 - integral;
}

double oracle_quantile(double df, double p) {
    double lo = 0.0, hi = 1e6;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (oracle_cdf(df, mid) < p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

ScoreSample sample_of(std::vector<double> scores) {
    ScoreSample s;
    s.scores = std::move(scores);
    s.artist_id = "artist_test";
    return s;
}

}  // namespace

TEST_CASE("t quantile matches the quadrature oracle within 1e-6") {
    for (const int df : {1, 2, 3, 5, 10, 30, 60, 120, 200}) {
        for (const double conf : {0.9, 0.95, 0.975, 0.99}) {
            const double got = stats::student_t_quantile(df, conf);
            const double want = oracle_quantile(df, conf);
            CAPTURE(df);
            CAPTURE(conf);
            REQUIRE(std::fabs(got - want) <= 1e-6);
        }
    }
}

TEST_CASE("t CDF matches the quadrature oracle") {
    for (const int df : {1, 4, 17, 99}) {
        for (const double t : {-3.0, -0.7, 0.0, 0.4, 1.9, 6.0}) {
            REQUIRE(std::fabs(stats::student_t_cdf(df, t) - oracle_cdf(df, t)) <=
                    1e-10);
        }
    }
}

TEST_CASE("worked t-test example: [0.5, 0.7, 0.3, 0.9, 0.6]") {
    const auto decision = decide_ttest(sample_of({0.5, 0.7, 0.3, 0.9, 0.6}));
    REQUIRE(decision.mean == doctest::Approx(0.6).epsilon(1e-12));
    REQUIRE(decision.stddev == doctest::Approx(std::sqrt(0.05)).epsilon(1e-12));
    REQUIRE(decision.t_statistic.has_value());
    REQUIRE(*decision.t_statistic == doctest::Approx(6.0).epsilon(1e-12));
    // Upper 95% critical value at df = 4.
    REQUIRE(*decision.critical_t == doctest::Approx(2.131846786).epsilon(1e-6));
    REQUIRE(decision.verdict == Verdict::infringing);
}

TEST_CASE("t-test edge cases") {
    SUBCASE("zero mean is never infringing") {
        const auto d = decide_ttest(sample_of({-0.4, 0.4, -0.2, 0.2}));
        REQUIRE(*d.t_statistic == doctest::Approx(0.0).epsilon(1e-12));
        REQUIRE(d.verdict == Verdict::not_infringing);
    }
    SUBCASE("constant positive sample falls back to the sign rule") {
        const auto d = decide_ttest(sample_of({0.1, 0.1, 0.1}));
        REQUIRE(d.degenerate_code == "zero_stddev");
        REQUIRE_FALSE(d.t_statistic.has_value());
        REQUIRE(d.verdict == Verdict::infringing);
    }
    SUBCASE("constant non-positive sample is not infringing") {
        const auto d = decide_ttest(sample_of({-0.3, -0.3}));
        REQUIRE(d.verdict == Verdict::not_infringing);
    }
    SUBCASE("single score raises TooFewScores") {
        REQUIRE_THROWS_AS(decide_ttest(sample_of({0.9})), TooFewScores);
    }
}

TEST_CASE("threshold rule: strict inequality, ties are clean") {
    REQUIRE(decide_threshold(sample_of({0.2, -0.1, 0.5})).verdict ==
            Verdict::infringing);
    REQUIRE(decide_threshold(sample_of({0.0, 0.0, 0.0})).verdict ==
            Verdict::not_infringing);
    // Hand-summed: (-0.9 + 0.8 - 0.1 + 0.05) / 4 = -0.0375
    const auto d = decide_threshold(sample_of({-0.9, 0.8, -0.1, 0.05}));
    REQUIRE(d.mean == doctest::Approx(-0.0375).epsilon(1e-12));
    REQUIRE(d.verdict == Verdict::not_infringing);
    REQUIRE_FALSE(d.t_statistic.has_value());
    REQUIRE_FALSE(d.critical_t.has_value());
}

TEST_CASE("adapt_binary maps predictions to +/-1 in order") {
    using BP = BinaryPrediction;
    const auto sample =
        adapt_binary({BP::positive, BP::negative, BP::positive}, "a");
    REQUIRE(sample.scores == std::vector<double>{1.0, -1.0, 1.0});
    REQUIRE(sample.source == ScoreSource::adapted_binary);

    const auto all_neg = adapt_binary(
        {BP::negative, BP::negative, BP::negative, BP::negative, BP::negative});
    for (const double s : all_neg.scores) REQUIRE(s == -1.0);
    REQUIRE(all_neg.scores.size() == 5);
}

TEST_CASE("adapted threshold decision equals majority vote, ties negative") {
    using BP = BinaryPrediction;
    for (int len = 1; len <= 4; ++len) {
        for (int bits = 0; bits < (1 << len); ++bits) {
            std::vector<BP> preds;
            int positives = 0;
            for (int i = 0; i < len; ++i) {
                const bool pos = (bits >> i) & 1;
                positives += pos;
                preds.push_back(pos ? BP::positive : BP::negative);
            }
            const auto verdict = decide_threshold(adapt_binary(preds)).verdict;
            const bool majority = 2 * positives > len;  // tie -> negative
            REQUIRE((verdict == Verdict::infringing) == majority);
        }
    }
}

TEST_CASE("decision invariants over random samples") {
    Rng rng(7);
    int degenerate_cases = 0;
    for (int trial = 0; trial < 400; ++trial) {
        const std::size_t n = 2 + rng.uniform_int(49);
        std::vector<double> scores(n);
        for (auto& s : scores) s = rng.uniform(-1.0, 1.0);

        const auto base_t = decide_ttest(sample_of(scores));
        const auto base_thold = decide_threshold(sample_of(scores));

        // Permutation invariance.
        std::vector<double> shuffled = scores;
        rng.shuffle(shuffled);
        const auto perm_t = decide_ttest(sample_of(shuffled));
        const auto perm_thold = decide_threshold(sample_of(shuffled));
        REQUIRE(perm_t.verdict == base_t.verdict);
        REQUIRE(perm_thold.verdict == base_thold.verdict);
        REQUIRE(perm_t.mean == doctest::Approx(base_t.mean).epsilon(1e-12));

        // Positive scaling invariance of the t statistic and both verdicts.
        const double k = rng.uniform(0.05, 1.0);
        std::vector<double> scaled = scores;
        for (auto& s : scaled) s *= k;
        const auto scaled_t = decide_ttest(sample_of(scaled));
        const auto scaled_thold = decide_threshold(sample_of(scaled));
        if (base_t.t_statistic) {
            REQUIRE(*scaled_t.t_statistic ==
                    doctest::Approx(*base_t.t_statistic).epsilon(1e-9));
        } else {
            ++degenerate_cases;
        }
        REQUIRE(scaled_t.verdict == base_t.verdict);
        REQUIRE(scaled_thold.verdict == base_thold.verdict);

        // One-directional implication: t-test infringing => threshold(0)
        // infringing when s > 0.
        if (base_t.t_statistic && base_t.verdict == Verdict::infringing)
            REQUIRE(base_thold.verdict == Verdict::infringing);
    }
    REQUIRE(degenerate_cases == 0);  // continuous draws never tie exactly
}

TEST_CASE("score samples are validated") {
    REQUIRE_THROWS_AS(decide_threshold(sample_of({})), TooFewScores);
    REQUIRE_THROWS_AS(decide_threshold(sample_of({1.5})), InvalidConfig);
    ScoreSample nan_sample = sample_of({0.0});
    nan_sample.scores[0] = std::nan("");
    REQUIRE_THROWS_AS(decide_threshold(nan_sample), InvalidConfig);
}
