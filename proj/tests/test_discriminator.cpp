#include <cmath>

#include <doctest.h>

#include "styleaudit/discriminator.hpp"
#include "styleaudit/errors.hpp"
#include "styleaudit/rng.hpp"

#include "testutil.hpp"

using namespace styleaudit;

namespace {

StyleRepresentation rep_of(std::vector<float> v, const std::string& id = "r",
                           const std::string& hash = "") {
    StyleRepresentation rep;
    rep.vector = std::move(v);
    rep.artwork_id = id;
    rep.tap_plan_hash = hash;
    return rep;
}

// Two Gaussian blobs, linearly separable by a wide margin.
TrainingData blob_data(int dim, int per_class, std::uint64_t seed,
                       double separation = 4.0) {
    Rng rng(seed);
    TrainingData data;
    const int train_n = per_class * 8 / 10;
    const int val_n = per_class - train_n;
    auto fill = [&](Matrix<float>& m, int rows, double center) {
        m = Matrix<float>(rows, dim);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < dim; ++c)
                m.row(r)[c] = static_cast<float>(
                    rng.normal(c == 0 ? center : 0.0, 1.0));
    };
    fill(data.train_pos, train_n, separation / 2);
    fill(data.train_neg, train_n, -separation / 2);
    fill(data.val_pos, val_n, separation / 2);
    fill(data.val_neg, val_n, -separation / 2);
    return data;
}

TrainConfig small_train_config() {
    TrainConfig cfg;
    cfg.hidden_sizes = {16, 8};
    cfg.learning_rate = 3e-3;
    cfg.max_epochs = 60;
    cfg.patience = 10;
    cfg.batch_size = 16;
    cfg.seed = 3;
    cfg.use_distortion_term = false;
    return cfg;
}

}  // namespace

TEST_CASE("zero-initialized network scores exactly 0") {
    Discriminator d({4, 8, 1}, "a", "");
    REQUIRE(d.score(rep_of({1.0f, -2.0f, 0.5f, 3.0f})) == 0.0);
}

TEST_CASE("scores are strictly inside (-1, 1)") {
    Discriminator d({3, 8, 1}, "a", "");
    d.net().init_random(9);
    Rng rng(4);
    for (int i = 0; i < 50; ++i) {
        std::vector<float> v(3);
        for (auto& x : v) x = static_cast<float>(rng.uniform(-100.0, 100.0));
        const double s = d.score(rep_of(v));
        REQUIRE(s > -1.0);
        REQUIRE(s < 1.0);
    }
}

TEST_CASE("loss hand examples") {
    Discriminator d({2, 4, 1}, "a", "");  // zero weights, f == 0 everywhere

    SUBCASE("y=1 score 0 gives squared error 1; y=-1 gives 1") {
        const double loss_pos = d.loss({{rep_of({1.f, 2.f}), 1.0}}, {});
        REQUIRE(loss_pos == doctest::Approx(1.0));
    }
    SUBCASE("identical pair representations contribute zero") {
        const auto r = rep_of({0.5f, -0.5f});
        const double value =
            d.loss({{rep_of({1.f, 2.f}), 1.0}}, {{r, r}});
        REQUIRE(value == doctest::Approx(1.0));  // pair term is exactly 0
    }
}

TEST_CASE("loss equals hand-computed squared errors at fixed scores") {
    // Build a 1-layer net computing tanh(w x); choose x so tanh gives 0.5.
    Mlp<double> net({1, 1});
    net.weights()[0][0] = 1.0;
    const double x = std::atanh(0.5);
    Matrix<double> batch(1, 1);
    batch.data[0] = x;

    // y = 1, f = 0.5 -> (1 - 0.5)^2 = 0.25
    REQUIRE(net.loss(batch, {1.0}, {}, {}) == doctest::Approx(0.25).epsilon(1e-9));
    // y = -1, f = 0.5 -> (-1 - 0.5)^2 = 2.25
    REQUIRE(net.loss(batch, {-1.0}, {}, {}) == doctest::Approx(2.25).epsilon(1e-9));
}

TEST_CASE("loss is independent of pairs when the distortion term is unused") {
    // Passing an empty pair list is the use_distortion_term=false path; the
    // loss must not change across different pair sets only when they are
    // excluded.
    Discriminator d({2, 4, 1}, "a", "");
    d.net().init_random(5);
    const std::vector<LabeledExample> batch{{rep_of({0.3f, -0.7f}), 1.0},
                                            {rep_of({-0.2f, 0.9f}), -1.0}};
    const double base = d.loss(batch, {});
    REQUIRE(d.loss(batch, {}) == doctest::Approx(base));

    // And with pairs included the value does change (sanity of the term).
    const std::vector<DistortionPair> pairs{
        {rep_of({1.f, 1.f}), rep_of({-1.f, 2.f})}};
    REQUIRE(d.loss(batch, pairs) >= base);
}

TEST_CASE("analytic gradients match central finite differences") {
    Rng rng(123);
    int checked = 0;
    for (int trial = 0; trial < 12; ++trial) {
        const int dim = 2 + static_cast<int>(rng.uniform_int(6));
        const int hidden = 2 + static_cast<int>(rng.uniform_int(6));
        const bool two_hidden = rng.bernoulli(0.5);
        std::vector<int> sizes{dim, hidden};
        if (two_hidden) sizes.push_back(3);
        sizes.push_back(1);

        Mlp<double> net(sizes);
        net.init_random(trial + 1);

        const int batch_n = 3, pair_n = 2;
        Matrix<double> batch(batch_n, dim), pp(pair_n, dim), pg(pair_n, dim);
        std::vector<double> targets(batch_n);
        for (auto& v : batch.data) v = rng.uniform(-1.0, 1.0);
        for (auto& v : pp.data) v = rng.uniform(-1.0, 1.0);
        for (auto& v : pg.data) v = rng.uniform(-1.0, 1.0);
        for (auto& y : targets) y = rng.bernoulli(0.5) ? 1.0 : -1.0;

        Mlp<double>::Gradients grads;
        net.loss_and_grad(batch, targets, pp, pg, grads);

        const double eps = 1e-6;
        for (std::size_t l = 0; l < net.layer_count(); ++l) {
            auto check_param = [&](std::vector<double>& params, double grad,
                                   std::size_t idx) {
                const double saved = params[idx];
                params[idx] = saved + eps;
                const double up = net.loss(batch, targets, pp, pg);
                params[idx] = saved - eps;
                const double down = net.loss(batch, targets, pp, pg);
                params[idx] = saved;
                const double fd = (up - down) / (2.0 * eps);
                const double denom = std::max({1e-4, std::fabs(fd), std::fabs(grad)});
                CAPTURE(l);
                CAPTURE(idx);
                REQUIRE(std::fabs(fd - grad) / denom < 1e-4);
                ++checked;
            };
            for (std::size_t i = 0; i < net.weights()[l].size(); i += 3)
                check_param(net.weights()[l], grads.weights[l][i], i);
            for (std::size_t i = 0; i < net.biases()[l].size(); ++i)
                check_param(net.biases()[l], grads.biases[l][i], i);
        }
    }
    REQUIRE(checked > 200);
}

TEST_CASE("training separates two Gaussian blobs") {
    const TrainingData data = blob_data(12, 50, 77);
    const TrainResult result = train(data, small_train_config(), "artist", "h");
    REQUIRE(result.best_validation_loss < 0.1);

    // Held-out positives score above held-out negatives on average.
    double pos_mean = 0.0, neg_mean = 0.0;
    for (std::size_t r = 0; r < data.val_pos.rows; ++r)
        pos_mean += result.discriminator.net().score_one(data.val_pos.row(r),
                                                         data.val_pos.cols);
    for (std::size_t r = 0; r < data.val_neg.rows; ++r)
        neg_mean += result.discriminator.net().score_one(data.val_neg.row(r),
                                                         data.val_neg.cols);
    pos_mean /= double(data.val_pos.rows);
    neg_mean /= double(data.val_neg.rows);
    REQUIRE(pos_mean > neg_mean);
    REQUIRE(pos_mean > 0.5);
    REQUIRE(neg_mean < -0.5);
}

TEST_CASE("training is deterministic under a fixed seed") {
    const TrainingData data = blob_data(8, 30, 11);
    const TrainConfig cfg = small_train_config();
    const TrainResult a = train(data, cfg, "artist", "h");
    const TrainResult b = train(data, cfg, "artist", "h");
    REQUIRE(a.best_epoch == b.best_epoch);
    for (std::size_t l = 0; l < a.discriminator.net().layer_count(); ++l)
        REQUIRE(a.discriminator.net().weights()[l] ==
                b.discriminator.net().weights()[l]);
}

TEST_CASE("early stopping contract") {
    SUBCASE("worsening validation from epoch 5 halts by epoch 15") {
        EarlyStopTracker tracker(10);
        int stopped_at = -1;
        for (int epoch = 1; epoch <= 100; ++epoch) {
            // improves through epoch 5, strictly worsens afterwards
            const double val = epoch <= 5 ? 1.0 / epoch : 0.2 + 0.01 * epoch;
            const auto obs = tracker.observe(val);
            if (obs.should_stop) {
                stopped_at = epoch;
                break;
            }
        }
        REQUIRE(stopped_at == 15);
        REQUIRE(tracker.best_loss() == doctest::Approx(0.2));
    }
    SUBCASE("ties keep the earlier epoch") {
        EarlyStopTracker tracker(5);
        tracker.observe(0.5);  // epoch 0
        tracker.observe(0.5);  // tie: not an improvement
        REQUIRE(tracker.best_epoch() == 0);
    }
    SUBCASE("best loss is the minimum observed") {
        EarlyStopTracker tracker(3);
        for (const double v : {0.9, 0.4, 0.6, 0.3, 0.8, 0.81, 0.82})
            tracker.observe(v);
        REQUIRE(tracker.best_loss() == doctest::Approx(0.3));
        REQUIRE(tracker.best_epoch() == 3);
    }
}

TEST_CASE("degenerate training data is rejected") {
    TrainingData data;
    data.train_pos = Matrix<float>(4, 3);
    data.train_neg = Matrix<float>(4, 3);
    data.val_pos = Matrix<float>(1, 3);
    data.val_neg = Matrix<float>(1, 3);
    // every row identical (all zeros)
    REQUIRE_THROWS_AS(train(data, small_train_config(), "a", "h"), Degenerate);
}

TEST_CASE("serialization round trip and tap plan refusal") {
    testutil::ScratchDir dir("disc");
    const TrainingData data = blob_data(6, 30, 5);
    TrainConfig cfg = small_train_config();
    cfg.max_epochs = 12;
    cfg.patience = 5;
    const TrainResult result = train(data, cfg, "artist_z", "hash123");

    const auto path = dir.path / "d.sadm";
    result.discriminator.save(path);
    const Discriminator loaded = Discriminator::load(path);
    REQUIRE(loaded.artist_id() == "artist_z");
    REQUIRE(loaded.tap_plan_hash() == "hash123");

    std::vector<float> probe(6, 0.25f);
    REQUIRE(loaded.score(rep_of(probe, "p", "hash123")) ==
            doctest::Approx(result.discriminator.score(rep_of(probe, "p", "hash123"))));

    REQUIRE_THROWS_AS(loaded.score(rep_of(probe, "p", "other_hash")),
                      DimMismatch);
    REQUIRE_THROWS_AS(loaded.score(rep_of({1.0f, 2.0f}, "p", "hash123")),
                      DimMismatch);
}
