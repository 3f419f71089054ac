#include "ppg/value_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

#include "json.hpp"
#include "ppg/errors.hpp"
#include "ppg/feedback.hpp"

namespace ppg {

namespace {

using Vec10 = Eigen::Matrix<double, MlpModel::kWidth1, 1>;
using Vec25 = Eigen::Matrix<double, MlpModel::kWidth2, 1>;
using Vec10b = Eigen::Matrix<double, MlpModel::kWidth3, 1>;

double unit_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

template <typename Mat>
void fill_uniform(Mat& m, double bound, std::mt19937_64& rng) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = bound * (2.0 * unit_uniform(rng) - 1.0);
}

double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// d kappa10 / d residual.
double dkappa(double r) { return 10.0 * sgn(r) + 2.0 * r; }

// Trunk activations and masks at one input.
struct Activations {
    Eigen::Vector2d a0;
    Vec10 z1, a1;
    Vec25 z2, a2;
    Vec10b z3, a3;
    double value = 0.0;
    Eigen::Vector2d grad_head;
    Eigen::Vector2d raw_u;
    double evader = 0.0;
    // Input gradient, plus the masked partial products reused by backprop.
    Eigen::Matrix<double, 1, MlpModel::kWidth3> q3;
    Eigen::Matrix<double, 1, MlpModel::kWidth2> q2;
    Eigen::Matrix<double, 1, MlpModel::kWidth1> q1;
    Eigen::Matrix<double, 1, 2> g;
};

Activations run(const MlpModel& m, const State& s) {
    Activations a;
    a.a0 << s.x, s.y;
    a.z1.noalias() = m.w1 * a.a0 + m.b1;
    a.a1 = a.z1.cwiseMax(0.0);
    a.z2.noalias() = m.w2 * a.a1 + m.b2;
    a.a2 = a.z2.cwiseMax(0.0);
    a.z3.noalias() = m.w3 * a.a2 + m.b3;
    a.a3 = a.z3.cwiseMax(0.0);
    a.value = (m.wv * a.a3)(0) + m.bv(0);
    a.grad_head.noalias() = m.wd * a.a3 + m.bd;
    a.raw_u.noalias() = m.wu * a.a3 + m.bu;
    a.evader = std::tanh(a.raw_u(0));
    const auto mask = [](const auto& z) { return (z.array() > 0.0).template cast<double>().matrix(); };
    a.q3 = m.wv.cwiseProduct(mask(a.z3).transpose());
    a.q2 = (a.q3 * m.w3).cwiseProduct(mask(a.z2).transpose());
    a.q1 = (a.q2 * m.w2).cwiseProduct(mask(a.z1).transpose());
    a.g.noalias() = a.q1 * m.w1;
    return a;
}

struct Labels {
    double evader;
    double pursuer;
};

Labels labels_of(const CharacteristicPoint& sample) {
    return {evader_feedback(sample.costate, sample.state).control,
            std::atan2(sample.costate.x, sample.costate.y)};
}

}  // namespace

MlpModel MlpModel::random(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    MlpModel m;
    fill_uniform(m.w1, std::sqrt(6.0 / kInput), rng);
    fill_uniform(m.w2, std::sqrt(6.0 / kWidth1), rng);
    fill_uniform(m.w3, std::sqrt(6.0 / kWidth2), rng);
    fill_uniform(m.wv, std::sqrt(6.0 / (kWidth3 + 1)), rng);
    fill_uniform(m.wd, std::sqrt(6.0 / (kWidth3 + 2)), rng);
    fill_uniform(m.wu, std::sqrt(6.0 / (kWidth3 + 2)), rng);
    // Slightly positive trunk biases keep units alive at initialization.
    m.b1.setConstant(0.01);
    m.b2.setConstant(0.01);
    m.b3.setConstant(0.01);
    return m;
}

std::vector<double> MlpModel::flatten() const {
    std::vector<double> out;
    out.reserve(parameter_count());
    for_each_block([&](const double* d, Eigen::Index n) { out.insert(out.end(), d, d + n); });
    return out;
}

void MlpModel::assign(std::span<const double> params) {
    if (params.size() != parameter_count()) throw ConfigError("parameter vector has wrong size");
    std::size_t off = 0;
    for_each_block([&](double* d, Eigen::Index n) {
        std::copy_n(params.begin() + static_cast<std::ptrdiff_t>(off), n, d);
        off += static_cast<std::size_t>(n);
    });
}

bool MlpModel::all_finite() const {
    bool ok = true;
    for_each_block([&](const double* d, Eigen::Index n) {
        for (Eigen::Index i = 0; i < n; ++i) ok = ok && std::isfinite(d[i]);
    });
    return ok;
}

ModelOutput forward(const MlpModel& m, const State& s) {
    const Activations a = run(m, s);
    return {a.value, {a.grad_head(0), a.grad_head(1)}, a.evader, wrap_angle(a.raw_u(1))};
}

Costate input_gradient(const MlpModel& m, const State& s) {
    const Activations a = run(m, s);
    return {a.g(0), a.g(1)};
}

double min_preactivation(const MlpModel& m, const State& s) {
    const Activations a = run(m, s);
    return std::min({a.z1.cwiseAbs().minCoeff(), a.z2.cwiseAbs().minCoeff(),
                     a.z3.cwiseAbs().minCoeff()});
}

double kappa10(std::span<const double> v) {
    double l1 = 0.0;
    double l2 = 0.0;
    for (double x : v) {
        l1 += std::abs(x);
        l2 += x * x;
    }
    return 10.0 * l1 + l2;
}

LossTerms loss_terms(const MlpModel& m, const CharacteristicPoint& sample, LossMode mode,
                     double soft_sign_sharpness) {
    const Activations a = run(m, sample.state);
    const Labels lab = labels_of(sample);
    const double x = sample.state.x;
    const double y = sample.state.y;
    const double d0 = a.grad_head(0);
    const double d1 = a.grad_head(1);
    const double switching = d0 * y - d1 * x;
    const double sign_of = mode == LossMode::Training ? std::tanh(soft_sign_sharpness * switching)
                                                      : sgn(switching);
    LossTerms out;
    out.terms[0] = kappa10(a.value - sample.value);
    const std::array<double, 2> r2{d0 - sample.costate.x, d1 - sample.costate.y};
    out.terms[1] = kappa10(r2);
    const std::array<double, 2> r3{a.evader - lab.evader, angle_diff(a.raw_u(1), lab.pursuer)};
    out.terms[2] = kappa10(r3);
    const std::array<double, 2> r4{a.g(0) - d0, a.g(1) - d1};
    out.terms[3] = kappa10(r4);
    const std::array<double, 2> r5{sign_of - a.evader, angle_diff(std::atan2(d0, d1), a.raw_u(1))};
    out.terms[4] = kappa10(r5);
    return out;
}

double accumulate_loss_gradient(const MlpModel& m, const CharacteristicPoint& sample,
                                double soft_sign_sharpness, MlpModel& grad) {
    const Activations a = run(m, sample.state);
    const Labels lab = labels_of(sample);
    const double x = sample.state.x;
    const double y = sample.state.y;
    const double d0 = a.grad_head(0);
    const double d1 = a.grad_head(1);

    // Residuals.
    const double e1 = a.value - sample.value;
    const double e2a = d0 - sample.costate.x;
    const double e2b = d1 - sample.costate.y;
    const double e3a = a.evader - lab.evader;
    const double e3b = angle_diff(a.raw_u(1), lab.pursuer);
    const double e4a = a.g(0) - d0;
    const double e4b = a.g(1) - d1;
    const double soft = std::tanh(soft_sign_sharpness * (d0 * y - d1 * x));
    const double norm2 = d0 * d0 + d1 * d1;
    const double e5a = soft - a.evader;
    const double e5b = angle_diff(std::atan2(d0, d1), a.raw_u(1));

    const double total = kappa10(e1) + kappa10(std::array{e2a, e2b}) +
                         kappa10(std::array{e3a, e3b}) + kappa10(std::array{e4a, e4b}) +
                         kappa10(std::array{e5a, e5b});

    // Derivatives with respect to the head outputs.
    const double dv = dkappa(e1);
    Eigen::Vector2d dd(dkappa(e2a) - dkappa(e4a), dkappa(e2b) - dkappa(e4b));
    double du1 = dkappa(e3a);
    double du2 = dkappa(e3b);
    const double k5a = dkappa(e5a);
    const double k5b = dkappa(e5b);
    const double dsoft = soft_sign_sharpness * (1.0 - soft * soft);
    dd(0) += k5a * dsoft * y;
    dd(1) -= k5a * dsoft * x;
    du1 -= k5a;
    if (norm2 > 0.0) {
        dd(0) += k5b * d1 / norm2;
        dd(1) -= k5b * d0 / norm2;
    }
    du2 -= k5b;
    const Eigen::Vector2d dr(du1 * (1.0 - a.evader * a.evader), du2);
    const Eigen::Vector2d dg(dkappa(e4a), dkappa(e4b));

    // Heads.
    grad.wv.noalias() += dv * a.a3.transpose();
    grad.bv(0) += dv;
    grad.wd.noalias() += dd * a.a3.transpose();
    grad.bd += dd;
    grad.wu.noalias() += dr * a.a3.transpose();
    grad.bu += dr;

    // Trunk, ordinary backprop.
    Vec10b delta3 = m.wv.transpose() * dv + m.wd.transpose() * dd + m.wu.transpose() * dr;
    delta3 = delta3.cwiseProduct((a.z3.array() > 0.0).cast<double>().matrix());
    grad.w3.noalias() += delta3 * a.a2.transpose();
    grad.b3 += delta3;
    Vec25 delta2 = (m.w3.transpose() * delta3).cwiseProduct((a.z2.array() > 0.0).cast<double>().matrix());
    grad.w2.noalias() += delta2 * a.a1.transpose();
    grad.b2 += delta2;
    Vec10 delta1 = (m.w2.transpose() * delta2).cwiseProduct((a.z1.array() > 0.0).cast<double>().matrix());
    grad.w1.noalias() += delta1 * a.a0.transpose();
    grad.b1 += delta1;

    // Input-gradient term g = wv D3 W3 D2 W2 D1 W1 with masks frozen.
    const Vec10 b1v = (m.w1 * dg).cwiseProduct((a.z1.array() > 0.0).cast<double>().matrix());
    const Vec25 b2v = (m.w2 * b1v).cwiseProduct((a.z2.array() > 0.0).cast<double>().matrix());
    const Vec10b b3v = (m.w3 * b2v).cwiseProduct((a.z3.array() > 0.0).cast<double>().matrix());
    grad.wv.noalias() += b3v.transpose();
    grad.w3.noalias() += a.q3.transpose() * b2v.transpose();
    grad.w2.noalias() += a.q2.transpose() * b1v.transpose();
    grad.w1.noalias() += a.q1.transpose() * dg.transpose();
    return total;
}

double mean_loss(const MlpModel& m, std::span<const CharacteristicPoint> data, LossMode mode,
                 double soft_sign_sharpness) {
    if (data.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& pt : data) sum += loss(m, pt, mode, soft_sign_sharpness);
    return sum / static_cast<double>(data.size());
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
    if (batch_size < 1) throw ConfigError("batch size must be positive");
    if (epochs < 0) throw ConfigError("epochs must be non-negative");
    if (!(soft_sign_sharpness > 0.0)) throw ConfigError("soft-sign sharpness must be positive");
    if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
        throw ConfigError("validation fraction must be in [0, 1)");
    }
    if (patience < 1) throw ConfigError("patience must be positive");
}

namespace {

template <typename It>
void seeded_shuffle(It first, It last, std::mt19937_64& rng) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
        const std::uint64_t j = rng() % i;
        std::iter_swap(first + static_cast<std::ptrdiff_t>(i - 1), first + static_cast<std::ptrdiff_t>(j));
    }
}

}  // namespace

void split_dataset(const Dataset& data, const TrainConfig& cfg, Dataset& train_set,
                   Dataset& val_set) {
    std::vector<std::size_t> idx(data.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(cfg.seed ^ 0x5851f42d4c957f2dULL);
    seeded_shuffle(idx.begin(), idx.end(), rng);
    const auto n_val = static_cast<std::size_t>(std::floor(cfg.validation_fraction * static_cast<double>(data.size())));
    train_set.clear();
    val_set.clear();
    for (std::size_t i = 0; i < idx.size(); ++i) {
        (i < n_val ? val_set : train_set).push_back(data[idx[i]]);
    }
}

MlpModel train(const Dataset& data, const TrainConfig& cfg, TrainReport* report) {
    cfg.validate();
    if (data.empty()) throw ConfigError("training data set is empty");
    Dataset train_set;
    Dataset val_set;
    split_dataset(data, cfg, train_set, val_set);
    if (train_set.empty()) throw ConfigError("training split is empty");
    const std::span<const CharacteristicPoint> val_view =
        val_set.empty() ? std::span<const CharacteristicPoint>(train_set) : val_set;

    MlpModel model = MlpModel::random(cfg.seed);
    const std::size_t n_params = MlpModel::parameter_count();
    std::vector<double> first(n_params, 0.0);
    std::vector<double> second(n_params, 0.0);
    constexpr double beta1 = 0.9;
    constexpr double beta2 = 0.999;
    constexpr double eps = 1e-8;
    std::uint64_t step = 0;

    TrainReport rep;
    rep.train_size = train_set.size();
    rep.val_size = val_set.size();
    rep.initial_train_loss = mean_loss(model, train_set, LossMode::Evaluation);
    rep.initial_val_loss = mean_loss(model, val_view, LossMode::Evaluation);
    rep.best_val_loss = rep.initial_val_loss;
    MlpModel best = model;

    std::mt19937_64 rng(cfg.seed);
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);
    int since_best = 0;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        seeded_shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
            MlpModel grad;
            double batch_loss = 0.0;
            for (std::size_t i = start; i < stop; ++i) {
                batch_loss += accumulate_loss_gradient(model, train_set[order[i]],
                                                       cfg.soft_sign_sharpness, grad);
            }
            if (!std::isfinite(batch_loss)) {
                throw NonFiniteLoss("non-finite batch loss at epoch " + std::to_string(epoch));
            }
            const double scale = 1.0 / static_cast<double>(stop - start);
            ++step;
            const double corr1 = 1.0 - std::pow(beta1, static_cast<double>(step));
            const double corr2 = 1.0 - std::pow(beta2, static_cast<double>(step));
            std::size_t k = 0;
            std::vector<double> g = grad.flatten();
            std::vector<double> w = model.flatten();
            for (; k < n_params; ++k) {
                const double gk = g[k] * scale;
                first[k] = beta1 * first[k] + (1.0 - beta1) * gk;
                second[k] = beta2 * second[k] + (1.0 - beta2) * gk * gk;
                w[k] -= cfg.learning_rate * (first[k] / corr1) / (std::sqrt(second[k] / corr2) + eps);
            }
            model.assign(w);
        }
        rep.epochs_run = epoch;
        const double val = mean_loss(model, val_view, LossMode::Evaluation);
        if (!std::isfinite(val)) throw NonFiniteLoss("non-finite validation loss");
        if (val < rep.best_val_loss) {
            rep.best_val_loss = val;
            rep.best_epoch = epoch;
            best = model;
            since_best = 0;
        } else if (++since_best >= cfg.patience) {
            break;
        }
    }
    rep.final_train_loss = mean_loss(best, train_set, LossMode::Evaluation);
    if (report != nullptr) *report = rep;
    return best;
}

namespace {

template <typename Mat>
nlohmann::json matrix_rows(const Mat& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

template <typename Vec>
nlohmann::json vector_values(const Vec& v) {
    nlohmann::json out = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

template <typename Mat>
void read_rows(const nlohmann::json& j, Mat& m, const char* what) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != m.rows()) {
        throw FormatError(std::string("checkpoint: weight block ") + what + " has wrong shape");
    }
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const auto& row = j[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != m.cols()) {
            throw FormatError(std::string("checkpoint: weight block ") + what + " has wrong shape");
        }
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(i, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
}

template <typename Vec>
void read_values(const nlohmann::json& j, Vec& v, const char* what) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != v.size()) {
        throw FormatError(std::string("checkpoint: bias block ") + what + " has wrong shape");
    }
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = j[static_cast<std::size_t>(i)].get<double>();
}

}  // namespace

void save_checkpoint(const MlpModel& m, const std::filesystem::path& path,
                     const CheckpointInfo& info) {
    nlohmann::json j;
    j["version"] = kCheckpointVersion;
    j["arch"] = MlpModel::kArch;
    j["heads"] = {{"v", 1}, {"dv", 2}, {"u", 2}};
    j["weights"] = {matrix_rows(m.w1), matrix_rows(m.w2), matrix_rows(m.w3),
                    matrix_rows(m.wv), matrix_rows(m.wd), matrix_rows(m.wu)};
    j["biases"] = {vector_values(m.b1), vector_values(m.b2), vector_values(m.b3),
                   vector_values(m.bv), vector_values(m.bd), vector_values(m.bu)};
    j["seed"] = info.seed;
    j["train_loss"] = info.train_loss;
    j["val_loss"] = info.val_loss;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << j.dump(1) << '\n';
    if (!out) throw IoError("failed writing " + path.string());
}

MlpModel load_checkpoint(const std::filesystem::path& path, CheckpointInfo* info) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(path.string() + ": truncated or malformed checkpoint (" + e.what() + ")");
    }
    MlpModel m;
    try {
        if (!j.contains("version") || j["version"].get<int>() != kCheckpointVersion) {
            throw FormatError(path.string() + ": unsupported checkpoint version (expected " +
                              std::to_string(kCheckpointVersion) + ")");
        }
        if (j.at("arch").get<std::array<int, 4>>() != MlpModel::kArch) {
            throw FormatError(path.string() + ": architecture mismatch");
        }
        const auto& w = j.at("weights");
        const auto& b = j.at("biases");
        if (!w.is_array() || w.size() != 6 || !b.is_array() || b.size() != 6) {
            throw FormatError(path.string() + ": expected six weight and bias blocks");
        }
        read_rows(w[0], m.w1, "1");
        read_rows(w[1], m.w2, "2");
        read_rows(w[2], m.w3, "3");
        read_rows(w[3], m.wv, "v");
        read_rows(w[4], m.wd, "dv");
        read_rows(w[5], m.wu, "u");
        read_values(b[0], m.b1, "1");
        read_values(b[1], m.b2, "2");
        read_values(b[2], m.b3, "3");
        read_values(b[3], m.bv, "v");
        read_values(b[4], m.bd, "dv");
        read_values(b[5], m.bu, "u");
        if (info != nullptr) {
            info->seed = j.value("seed", std::uint64_t{0});
            info->train_loss = j.value("train_loss", 0.0);
            info->val_loss = j.value("val_loss", 0.0);
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path.string() + ": invalid checkpoint (" + e.what() + ")");
    }
    if (!m.all_finite()) throw FormatError(path.string() + ": non-finite parameters");
    return m;
}

}  // namespace ppg
