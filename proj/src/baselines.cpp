#include "prefeval/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "prefeval/errors.hpp"
#include "prefeval/jsonl.hpp"

namespace prefeval::baselines {

using jsonl::json;
using jsonl::ordered_json;

double reviewer_avg(const ReviewerProfile& profile) {
    if (profile.entries.empty()) throw DataError("reviewer_avg: empty profile");
    double sum = 0.0;
    for (const ProfileEntry& entry : profile.entries) {
        if (!entry.score)
            throw DataError("reviewer_avg: profile entry without score for item " + entry.item_id);
        sum += static_cast<double>(*entry.score);
    }
    return sum / static_cast<double>(profile.entries.size());
}

namespace {

struct TrainingIndex {
    std::vector<std::string> users;   // sorted
    std::vector<std::string> items;   // sorted
    std::map<std::string, std::size_t> user_index;
    std::map<std::string, std::size_t> item_index;
};

TrainingIndex build_index(const std::vector<Rating>& ratings) {
    std::set<std::string> users, items;
    for (const Rating& r : ratings) {
        users.insert(r.reviewer_id);
        items.insert(r.item_id);
    }
    TrainingIndex index;
    index.users.assign(users.begin(), users.end());
    index.items.assign(items.begin(), items.end());
    for (std::size_t i = 0; i < index.users.size(); ++i) index.user_index[index.users[i]] = i;
    for (std::size_t i = 0; i < index.items.size(); ++i) index.item_index[index.items[i]] = i;
    return index;
}

double predict_raw(double mu, double bu, double bi, const double* p, const double* q, int d) {
    double dot = 0.0;
    for (int k = 0; k < d; ++k) dot += p[k] * q[k];
    return mu + bu + bi + dot;
}

} // namespace

MfModel mf_fit(const std::vector<Rating>& ratings, const MfHyper& hyper, ScoreScale scale) {
    if (ratings.empty()) throw DataError("mf_fit: no ratings");
    if (hyper.dim < 1) throw UsageError("mf_fit: dim must be >= 1");
    if (hyper.epochs < 1) throw UsageError("mf_fit: epochs must be >= 1");

    const int d = hyper.dim;
    TrainingIndex index = build_index(ratings);
    const std::size_t n_users = index.users.size();
    const std::size_t n_items = index.items.size();

    double mu = 0.0;
    for (const Rating& r : ratings) mu += r.score;
    mu /= static_cast<double>(ratings.size());

    std::mt19937_64 rng(hyper.seed);
    std::normal_distribution<double> init(0.0, 0.01);
    std::vector<double> user_vec(n_users * static_cast<std::size_t>(d));
    std::vector<double> item_vec(n_items * static_cast<std::size_t>(d));
    for (double& v : user_vec) v = init(rng);
    for (double& v : item_vec) v = init(rng);
    std::vector<double> user_b(n_users, 0.0);
    std::vector<double> item_b(n_items, 0.0);

    struct Obs {
        std::size_t u;
        std::size_t i;
        double r;
    };
    std::vector<Obs> observations;
    observations.reserve(ratings.size());
    for (const Rating& r : ratings)
        observations.push_back({index.user_index.at(r.reviewer_id),
                                index.item_index.at(r.item_id), r.score});

    auto train_rmse = [&] {
        double sse = 0.0;
        for (const Obs& o : observations) {
            double e = o.r - predict_raw(mu, user_b[o.u], item_b[o.i],
                                         &user_vec[o.u * static_cast<std::size_t>(d)],
                                         &item_vec[o.i * static_cast<std::size_t>(d)], d);
            sse += e * e;
        }
        return std::sqrt(sse / static_cast<double>(observations.size()));
    };

    const double initial_rmse = train_rmse();
    const double lr = hyper.learning_rate;
    const double lambda = hyper.regularization;

    MfModel model;
    model.hyper = hyper;
    model.global_mean = mu;
    model.scale = scale;

    std::vector<std::size_t> order(observations.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> p_old(static_cast<std::size_t>(d));

    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t idx : order) {
            const Obs& o = observations[idx];
            double* p = &user_vec[o.u * static_cast<std::size_t>(d)];
            double* q = &item_vec[o.i * static_cast<std::size_t>(d)];
            double e = o.r - predict_raw(mu, user_b[o.u], item_b[o.i], p, q, d);
            user_b[o.u] += lr * (e - lambda * user_b[o.u]);
            item_b[o.i] += lr * (e - lambda * item_b[o.i]);
            std::copy(p, p + d, p_old.begin());
            for (int k = 0; k < d; ++k) {
                p[k] += lr * (e * q[k] - lambda * p[k]);
                q[k] += lr * (e * p_old[static_cast<std::size_t>(k)] - lambda * q[k]);
            }
        }
        double rmse = train_rmse();
        model.epoch_rmse.push_back(rmse);
        if (!std::isfinite(rmse) || rmse > initial_rmse * 10.0)
            throw DataError("mf_fit diverged at epoch " + std::to_string(epoch) +
                            " (RMSE " + std::to_string(rmse) +
                            "); try a smaller learning rate");
    }

    for (std::size_t u = 0; u < n_users; ++u) {
        model.user_vectors[index.users[u]] = std::vector<double>(
            user_vec.begin() + static_cast<std::ptrdiff_t>(u * static_cast<std::size_t>(d)),
            user_vec.begin() + static_cast<std::ptrdiff_t>((u + 1) * static_cast<std::size_t>(d)));
        model.user_bias[index.users[u]] = user_b[u];
    }
    for (std::size_t i = 0; i < n_items; ++i) {
        model.item_vectors[index.items[i]] = std::vector<double>(
            item_vec.begin() + static_cast<std::ptrdiff_t>(i * static_cast<std::size_t>(d)),
            item_vec.begin() + static_cast<std::ptrdiff_t>((i + 1) * static_cast<std::size_t>(d)));
        model.item_bias[index.items[i]] = item_b[i];
    }
    return model;
}

namespace {

/// Gaussian elimination with partial pivoting; a is (n x n) row-major.
std::vector<double> solve_linear(std::vector<double> a, std::vector<double> b, std::size_t n) {
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t row = col + 1; row < n; ++row) {
            if (std::abs(a[row * n + col]) > std::abs(a[pivot * n + col])) pivot = row;
        }
        if (std::abs(a[pivot * n + col]) < 1e-12)
            throw DataError("fold-in system is singular");
        if (pivot != col) {
            for (std::size_t k = 0; k < n; ++k) std::swap(a[col * n + k], a[pivot * n + k]);
            std::swap(b[col], b[pivot]);
        }
        for (std::size_t row = col + 1; row < n; ++row) {
            double f = a[row * n + col] / a[col * n + col];
            if (f == 0.0) continue;
            for (std::size_t k = col; k < n; ++k) a[row * n + k] -= f * a[col * n + k];
            b[row] -= f * b[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (std::size_t row = n; row-- > 0;) {
        double sum = b[row];
        for (std::size_t k = row + 1; k < n; ++k) sum -= a[row * n + k] * x[k];
        x[row] = sum / a[row * n + row];
    }
    return x;
}

} // namespace

FoldInResult mf_fold_in(const MfModel& model, const ReviewerProfile& profile) {
    if (profile.entries.empty()) throw DataError("mf_fold_in: empty profile");
    const std::size_t d = static_cast<std::size_t>(model.hyper.dim);
    const std::size_t n = d + 1;  // vector plus bias

    // Normal equations for min sum (resid - p.q - b)^2 + lambda*||p||^2; the
    // bias column carries no ridge term.
    std::vector<double> ata(n * n, 0.0);
    std::vector<double> atb(n, 0.0);
    for (const ProfileEntry& entry : profile.entries) {
        auto qit = model.item_vectors.find(entry.item_id);
        if (qit == model.item_vectors.end())
            throw DataError("mf_fold_in: unknown item " + entry.item_id);
        if (!entry.score)
            throw DataError("mf_fold_in: profile entry without score for item " + entry.item_id);
        const std::vector<double>& q = qit->second;
        double resid = static_cast<double>(*entry.score) - model.global_mean -
                       model.item_bias.at(entry.item_id);

        std::vector<double> z(n, 1.0);
        std::copy(q.begin(), q.end(), z.begin());
        for (std::size_t r = 0; r < n; ++r) {
            atb[r] += z[r] * resid;
            for (std::size_t c = 0; c < n; ++c) ata[r * n + c] += z[r] * z[c];
        }
    }
    // SGD decays the user vector once per observed rating, so its stationary
    // point is ridge with lambda scaled by the rating count; mirror that here.
    for (std::size_t k = 0; k < d; ++k)
        ata[k * n + k] += model.hyper.regularization *
                          static_cast<double>(profile.entries.size());

    std::vector<double> solution = solve_linear(std::move(ata), std::move(atb), n);
    FoldInResult result;
    result.user_vector.assign(solution.begin(), solution.begin() + static_cast<std::ptrdiff_t>(d));
    result.bias = solution[d];
    return result;
}

double mf_predict(const MfModel& model, const FoldInResult& user, const std::string& item_id) {
    auto qit = model.item_vectors.find(item_id);
    if (qit == model.item_vectors.end()) throw DataError("mf_predict: unknown item " + item_id);
    double raw = predict_raw(model.global_mean, user.bias, model.item_bias.at(item_id),
                             user.user_vector.data(), qit->second.data(), model.hyper.dim);
    return std::clamp(raw, static_cast<double>(model.scale.min),
                      static_cast<double>(model.scale.max));
}

double mf_predict(const MfModel& model, const std::string& reviewer_id,
                  const std::string& item_id) {
    auto uit = model.user_vectors.find(reviewer_id);
    if (uit == model.user_vectors.end())
        throw DataError("mf_predict: unknown reviewer " + reviewer_id);
    FoldInResult user{uit->second, model.user_bias.at(reviewer_id)};
    return mf_predict(model, user, item_id);
}

void save_model(const MfModel& model, const std::filesystem::path& path) {
    ordered_json doc;
    doc["schema_version"] = 1;
    doc["hyper"] = {{"dim", model.hyper.dim},
                    {"learning_rate", model.hyper.learning_rate},
                    {"regularization", model.hyper.regularization},
                    {"epochs", model.hyper.epochs},
                    {"seed", model.hyper.seed}};
    doc["global_mean"] = model.global_mean;
    doc["scale"] = {{"min", model.scale.min}, {"max", model.scale.max}};
    doc["user_vectors"] = model.user_vectors;
    doc["item_vectors"] = model.item_vectors;
    doc["user_bias"] = model.user_bias;
    doc["item_bias"] = model.item_bias;
    doc["epoch_rmse"] = model.epoch_rmse;
    jsonl::write_file(path, doc.dump() + "\n");
}

MfModel load_model(const std::filesystem::path& path) {
    json doc = json::parse(jsonl::read_file(path));
    MfModel model;
    const json& hyper = doc.at("hyper");
    model.hyper.dim = hyper.at("dim").get<int>();
    model.hyper.learning_rate = hyper.at("learning_rate").get<double>();
    model.hyper.regularization = hyper.at("regularization").get<double>();
    model.hyper.epochs = hyper.at("epochs").get<int>();
    model.hyper.seed = hyper.at("seed").get<std::uint64_t>();
    model.global_mean = doc.at("global_mean").get<double>();
    model.scale.min = doc.at("scale").at("min").get<int>();
    model.scale.max = doc.at("scale").at("max").get<int>();
    model.user_vectors = doc.at("user_vectors").get<std::map<std::string, std::vector<double>>>();
    model.item_vectors = doc.at("item_vectors").get<std::map<std::string, std::vector<double>>>();
    model.user_bias = doc.at("user_bias").get<std::map<std::string, double>>();
    model.item_bias = doc.at("item_bias").get<std::map<std::string, double>>();
    model.epoch_rmse = doc.at("epoch_rmse").get<std::vector<double>>();
    for (const auto& [id, v] : model.user_vectors) {
        if (v.size() != static_cast<std::size_t>(model.hyper.dim))
            throw DataError("checkpoint vector dimension mismatch for user " + id);
    }
    return model;
}

} // namespace prefeval::baselines
