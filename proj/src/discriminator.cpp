#include "styleaudit/discriminator.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "styleaudit/kernels.hpp"

namespace styleaudit {

void TrainConfig::validate() const {
    if (learning_rate <= 0.0) throw InvalidConfig("learning_rate must be > 0");
    if (max_epochs < 1) throw InvalidConfig("max_epochs must be >= 1");
    if (patience < 1 || patience >= max_epochs)
        throw InvalidConfig("patience must be in [1, max_epochs)");
    if (batch_size < 1) throw InvalidConfig("batch_size must be >= 1");
    if (hidden_sizes.empty()) throw InvalidConfig("at least one hidden layer");
    for (const int h : hidden_sizes)
        if (h < 1) throw InvalidConfig("hidden sizes must be >= 1");
}

Discriminator::Discriminator(std::vector<int> layer_sizes,
                             std::string artist_id, std::string tap_plan_hash)
    : net_(std::move(layer_sizes)),
      artist_id_(std::move(artist_id)),
      tap_plan_hash_(std::move(tap_plan_hash)) {}

double Discriminator::score(const StyleRepresentation& rep) const {
    if (!tap_plan_hash_.empty() && !rep.tap_plan_hash.empty() &&
        rep.tap_plan_hash != tap_plan_hash_)
        throw DimMismatch("representation tap plan " + rep.tap_plan_hash +
                          " does not match discriminator plan " +
                          tap_plan_hash_);
    return net_.score_one(rep.vector.data(), rep.vector.size());
}

double Discriminator::loss(const std::vector<LabeledExample>& batch,
                           const std::vector<DistortionPair>& pairs) const {
    if (batch.empty()) throw InvalidConfig("loss: empty batch");
    const auto dim = static_cast<std::size_t>(net_.input_dim());
    Matrix<float> x(batch.size(), dim);
    std::vector<float> y(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        if (batch[i].representation.vector.size() != dim)
            throw DimMismatch("batch representation width mismatch");
        std::copy(batch[i].representation.vector.begin(),
                  batch[i].representation.vector.end(), x.row(i));
        y[i] = static_cast<float>(batch[i].target);
    }
    Matrix<float> pp(pairs.size(), dim);
    Matrix<float> pg(pairs.size(), dim);
    for (std::size_t j = 0; j < pairs.size(); ++j) {
        if (pairs[j].public_rep.vector.size() != dim ||
            pairs[j].generated_rep.vector.size() != dim)
            throw DimMismatch("pair representation width mismatch");
        std::copy(pairs[j].public_rep.vector.begin(),
                  pairs[j].public_rep.vector.end(), pp.row(j));
        std::copy(pairs[j].generated_rep.vector.begin(),
                  pairs[j].generated_rep.vector.end(), pg.row(j));
    }
    return net_.loss(x, y, pp, pg);
}

Matrix<float> to_matrix(const std::vector<const StyleRepresentation*>& reps) {
    if (reps.empty()) return {};
    Matrix<float> m(reps.size(), reps.front()->vector.size());
    for (std::size_t i = 0; i < reps.size(); ++i) {
        if (reps[i]->vector.size() != m.cols)
            throw DimMismatch("mixed representation lengths in matrix");
        std::copy(reps[i]->vector.begin(), reps[i]->vector.end(), m.row(i));
    }
    return m;
}

namespace {

bool all_rows_identical(const Matrix<float>& a, const Matrix<float>& b) {
    const float* first = a.row(0);
    auto same = [&](const Matrix<float>& m) {
        for (std::size_t r = 0; r < m.rows; ++r)
            if (std::memcmp(m.row(r), first, m.cols * sizeof(float)) != 0)
                return false;
        return true;
    };
    return same(a) && same(b);
}

// Adam state per parameter array.
struct AdamState {
    std::vector<std::vector<float>> m_w, v_w, m_b, v_b;
    int step = 0;

    explicit AdamState(const Mlp<float>& net) {
        for (const auto& w : net.weights()) {
            m_w.emplace_back(w.size(), 0.0f);
            v_w.emplace_back(w.size(), 0.0f);
        }
        for (const auto& b : net.biases()) {
            m_b.emplace_back(b.size(), 0.0f);
            v_b.emplace_back(b.size(), 0.0f);
        }
    }

    void apply(Mlp<float>& net, const Mlp<float>::Gradients& grads, float lr) {
        constexpr float kBeta1 = 0.9f, kBeta2 = 0.999f, kEps = 1e-8f;
        ++step;
        const float corr1 = 1.0f - std::pow(kBeta1, static_cast<float>(step));
        const float corr2 = 1.0f - std::pow(kBeta2, static_cast<float>(step));
        for (std::size_t l = 0; l < net.weights().size(); ++l) {
            kernels::adam_step(net.weights()[l].data(),
                               grads.weights[l].data(), m_w[l].data(),
                               v_w[l].data(), net.weights()[l].size(), lr,
                               kBeta1, kBeta2, kEps, corr1, corr2);
            kernels::adam_step(net.biases()[l].data(), grads.biases[l].data(),
                               m_b[l].data(), v_b[l].data(),
                               net.biases()[l].size(), lr, kBeta1, kBeta2,
                               kEps, corr1, corr2);
        }
    }
};

Matrix<float> gather_rows(const Matrix<float>& pos, const Matrix<float>& neg,
                          const std::vector<std::size_t>& indices,
                          std::size_t begin, std::size_t end,
                          std::vector<float>& targets) {
    Matrix<float> out(end - begin, pos.cols);
    targets.resize(end - begin);
    for (std::size_t i = begin; i < end; ++i) {
        const std::size_t idx = indices[i];
        const bool is_pos = idx < pos.rows;
        const float* src = is_pos ? pos.row(idx) : neg.row(idx - pos.rows);
        std::copy(src, src + pos.cols, out.row(i - begin));
        targets[i - begin] = is_pos ? 1.0f : -1.0f;
    }
    return out;
}

// Regression-only loss on the validation split.
double validation_loss(const Mlp<float>& net, const Matrix<float>& val_pos,
                       const Matrix<float>& val_neg) {
    Matrix<float> x(val_pos.rows + val_neg.rows, val_pos.cols);
    std::vector<float> y(x.rows);
    std::copy(val_pos.data.begin(), val_pos.data.end(), x.data.begin());
    std::copy(val_neg.data.begin(), val_neg.data.end(),
              x.data.begin() + val_pos.data.size());
    for (std::size_t i = 0; i < x.rows; ++i)
        y[i] = i < val_pos.rows ? 1.0f : -1.0f;
    return net.loss(x, y, {}, {});
}

}  // namespace

TrainResult train(const TrainingData& data, const TrainConfig& cfg,
                  const std::string& artist_id,
                  const std::string& tap_plan_hash) {
    cfg.validate();
    if (data.train_pos.rows < 4)
        throw InvalidConfig("need at least 4 positive training examples");
    if (data.train_neg.rows == 0)
        throw InvalidConfig("need negative training examples");
    if (data.val_pos.rows == 0 || data.val_neg.rows == 0)
        throw InvalidConfig("need a validation split");
    if (cfg.use_distortion_term && data.pair_public.rows == 0)
        throw InvalidConfig(
            "distortion term enabled but no distortion pairs supplied");
    if (all_rows_identical(data.train_pos, data.train_neg))
        throw Degenerate(
            "all positive and negative representations are identical; "
            "upstream extraction failed");

    const auto dim = data.train_pos.cols;
    std::vector<int> sizes;
    sizes.push_back(static_cast<int>(dim));
    for (const int h : cfg.hidden_sizes) sizes.push_back(h);
    sizes.push_back(1);

    Discriminator disc(sizes, artist_id, tap_plan_hash);
    disc.net().init_random(static_cast<std::uint64_t>(cfg.seed));

    const bool use_pairs = cfg.use_distortion_term && data.pair_public.rows > 0;
    const std::size_t n_examples = data.train_pos.rows + data.train_neg.rows;
    const std::size_t n_pairs = use_pairs ? data.pair_public.rows : 0;

    std::vector<std::size_t> order(n_examples);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::vector<std::size_t> pair_order(n_pairs);
    for (std::size_t i = 0; i < pair_order.size(); ++i) pair_order[i] = i;

    Rng rng(static_cast<std::uint64_t>(cfg.seed));
    AdamState adam(disc.net());
    EarlyStopTracker tracker(cfg.patience);
    Mlp<float> best = disc.net();
    std::size_t pair_cursor = 0;
    int epochs_run = 0;

    Mlp<float>::Gradients grads;
    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        epochs_run = epoch + 1;
        Rng epoch_rng = rng.derive(static_cast<std::uint64_t>(epoch));
        epoch_rng.shuffle(order);
        if (n_pairs > 1) epoch_rng.shuffle(pair_order);

        const auto batch = static_cast<std::size_t>(cfg.batch_size);
        for (std::size_t begin = 0; begin < n_examples; begin += batch) {
            const std::size_t end = std::min(n_examples, begin + batch);
            std::vector<float> targets;
            Matrix<float> x = gather_rows(data.train_pos, data.train_neg,
                                          order, begin, end, targets);

            Matrix<float> pp, pg;
            if (n_pairs > 0) {
                const std::size_t pb = std::min<std::size_t>(batch, n_pairs);
                pp = Matrix<float>(pb, dim);
                pg = Matrix<float>(pb, dim);
                for (std::size_t j = 0; j < pb; ++j) {
                    const std::size_t idx = pair_order[(pair_cursor + j) % n_pairs];
                    std::copy(data.pair_public.row(idx),
                              data.pair_public.row(idx) + dim, pp.row(j));
                    std::copy(data.pair_generated.row(idx),
                              data.pair_generated.row(idx) + dim, pg.row(j));
                }
                pair_cursor = (pair_cursor + pb) % n_pairs;
            }

            disc.net().loss_and_grad(x, targets, pp, pg, grads);
            adam.apply(disc.net(), grads,
                       static_cast<float>(cfg.learning_rate));
        }

        const double val = validation_loss(disc.net(), data.val_pos, data.val_neg);
        const auto obs = tracker.observe(val);
        if (obs.improved) best = disc.net();
        if (obs.should_stop) break;
    }

    disc.net() = best;
    TrainResult result;
    result.discriminator = std::move(disc);
    result.best_validation_loss = tracker.best_loss();
    result.best_epoch = tracker.best_epoch();
    result.epochs_run = epochs_run;
    return result;
}

namespace {
constexpr std::uint32_t kDiscMagic = 0x5341444d;  // "SADM"
constexpr std::uint32_t kDiscVersion = 1;

void write_str(std::ostream& out, const std::string& s) {
    const auto n = static_cast<std::uint32_t>(s.size());
    out.write(reinterpret_cast<const char*>(&n), sizeof(n));
    out.write(s.data(), n);
}

std::string read_str(std::istream& in) {
    std::uint32_t n = 0;
    in.read(reinterpret_cast<char*>(&n), sizeof(n));
    if (n > (1u << 20)) throw IoError("corrupt discriminator file");
    std::string s(n, '\0');
    in.read(s.data(), n);
    return s;
}
}  // namespace

void Discriminator::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write discriminator: " + path.string());
    out.write(reinterpret_cast<const char*>(&kDiscMagic), sizeof(kDiscMagic));
    out.write(reinterpret_cast<const char*>(&kDiscVersion), sizeof(kDiscVersion));
    write_str(out, artist_id_);
    write_str(out, tap_plan_hash_);
    const auto n_layers = static_cast<std::uint32_t>(net_.layer_sizes().size());
    out.write(reinterpret_cast<const char*>(&n_layers), sizeof(n_layers));
    for (const int s : net_.layer_sizes()) {
        const auto v = static_cast<std::int32_t>(s);
        out.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
    for (std::size_t l = 0; l < net_.layer_count(); ++l) {
        const auto& w = net_.weights()[l];
        const auto& b = net_.biases()[l];
        out.write(reinterpret_cast<const char*>(w.data()),
                  static_cast<std::streamsize>(w.size() * sizeof(float)));
        out.write(reinterpret_cast<const char*>(b.data()),
                  static_cast<std::streamsize>(b.size() * sizeof(float)));
    }
    if (!out) throw IoError("short write to " + path.string());
}

Discriminator Discriminator::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("discriminator file not found: " + path.string());
    std::uint32_t magic = 0, version = 0;
    in.read(reinterpret_cast<char*>(&magic), sizeof(magic));
    in.read(reinterpret_cast<char*>(&version), sizeof(version));
    if (!in || magic != kDiscMagic || version != kDiscVersion)
        throw IoError(path.string() + ": not a discriminator file");
    const std::string artist = read_str(in);
    const std::string hash = read_str(in);
    std::uint32_t n_layers = 0;
    in.read(reinterpret_cast<char*>(&n_layers), sizeof(n_layers));
    if (!in || n_layers < 2 || n_layers > 16)
        throw IoError(path.string() + ": corrupt layer count");
    std::vector<int> sizes(n_layers);
    for (auto& s : sizes) {
        std::int32_t v = 0;
        in.read(reinterpret_cast<char*>(&v), sizeof(v));
        s = v;
    }
    Discriminator disc(sizes, artist, hash);
    for (std::size_t l = 0; l < disc.net().layer_count(); ++l) {
        auto& w = disc.net().weights()[l];
        auto& b = disc.net().biases()[l];
        in.read(reinterpret_cast<char*>(w.data()),
                static_cast<std::streamsize>(w.size() * sizeof(float)));
        in.read(reinterpret_cast<char*>(b.data()),
                static_cast<std::streamsize>(b.size() * sizeof(float)));
    }
    if (!in) throw IoError(path.string() + ": truncated discriminator file");
    return disc;
}

}  // namespace styleaudit
