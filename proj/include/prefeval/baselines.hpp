#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "prefeval/types.hpp"

namespace prefeval::baselines {

/// Arithmetic mean of the profile's scores (K = 1 returns the single score).
/// Throws DataError on an empty profile or a score-less entry.
double reviewer_avg(const ReviewerProfile& profile);

struct MfHyper {
    int dim = 16;
    double learning_rate = 0.01;
    double regularization = 0.01;
    int epochs = 600;
    std::uint64_t seed = 0;
};

struct Rating {
    std::string reviewer_id;
    std::string item_id;
    double score = 0.0;
};

/// Biased matrix factorization: r_hat = mu + b_u + b_i + p_u . q_i.
struct MfModel {
    MfHyper hyper;
    double global_mean = 0.0;
    ScoreScale scale;
    std::map<std::string, std::vector<double>> user_vectors;
    std::map<std::string, std::vector<double>> item_vectors;
    std::map<std::string, double> user_bias;
    std::map<std::string, double> item_bias;
    std::vector<double> epoch_rmse;  // training RMSE after each epoch
};

/// SGD fit minimizing sum (r - mu - b_u - b_i - p_u.q_i)^2 + lambda*||params||^2
/// with per-epoch example shuffling derived from the seed. Single-threaded and
/// bit-reproducible for a fixed seed. Throws DataError when the training RMSE
/// exceeds ten times its initial value (suggests a smaller learning rate).
MfModel mf_fit(const std::vector<Rating>& ratings, const MfHyper& hyper,
               ScoreScale scale = {1, 10});

struct FoldInResult {
    std::vector<double> user_vector;
    double bias = 0.0;
};

/// Regularized least squares for an unseen reviewer's vector and bias with
/// item factors frozen; the bias is left unregularized so a profile over
/// zero-vector items yields bias = mean residual. Throws DataError on profile
/// items unknown to the model.
FoldInResult mf_fold_in(const MfModel& model, const ReviewerProfile& profile);

/// mu + b_u + b_i + p_u.q_i clamped to the model's score scale. Throws
/// DataError on an unknown item.
double mf_predict(const MfModel& model, const FoldInResult& user, const std::string& item_id);

/// Prediction for a reviewer seen at training time.
double mf_predict(const MfModel& model, const std::string& reviewer_id,
                  const std::string& item_id);

void save_model(const MfModel& model, const std::filesystem::path& path);
MfModel load_model(const std::filesystem::path& path);

} // namespace prefeval::baselines
