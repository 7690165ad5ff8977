#pragma once

#include "pfl/sensing.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace pfl {

struct SplitSpec {
    int comb = 2;  // 1..5
    double val_fraction_within = 0.15;
    std::uint64_t seed = 1;
    bool stratified = true;

    /// Train+validation share of the rows for the chosen comb.
    double train_val_fraction() const;
    void validate() const;
};

struct Split {
    std::vector<std::size_t> train, val, test;
};

/// Stratified by `labels` when spec.stratified is set. Per-class counts are
/// allocated by largest remainder so the totals hit round(f * m) exactly.
Split split(const std::vector<int>& labels, const SplitSpec& spec);
/// Unstratified split of m rows.
Split split(std::size_t m_rows, const SplitSpec& spec);

/// 1 - x.y / (|x| |y|). Throws DataError on a zero vector.
double cosine_distance(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y);
double euclidean_distance(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y);

enum class Metric { Cosine, Euclidean };
Metric parse_metric(const std::string& name);
std::string metric_name(Metric m);

struct KnnModel {
    int k = 2;
    Metric metric = Metric::Cosine;
    RowMatrix X;
    std::vector<int> y;
};

KnnModel knn_fit(const RowMatrix& X, const std::vector<int>& y, int k, Metric metric = Metric::Cosine);
int knn_predict(const KnnModel& model, const Eigen::Ref<const Eigen::RowVectorXd>& query);
std::vector<int> knn_predict_batch(const KnnModel& model, const RowMatrix& queries);

/// Mean validation accuracy for each candidate k over stratified folds.
std::vector<double> knn_cross_validate(const RowMatrix& X, const std::vector<int>& y, const std::vector<int>& k_candidates,
                                       int folds = 10, Metric metric = Metric::Cosine, std::uint64_t seed = 1);

struct AnnSettings {
    int hidden = 5;
    double learning_rate = 0.5;
    int batch_size = 32;
    int max_epochs = 2000;
    int patience = 200;
    /// Min-max scale each feature over the training rows before training.
    bool minmax_scaling = true;
};

/// n-h-C network, sigmoid on both layers.
struct AnnModel {
    Eigen::MatrixXd W1;  // h x n
    Eigen::VectorXd b1;
    Eigen::MatrixXd W2;  // C x h
    Eigen::VectorXd b2;
    /// Input map x -> (x - x_shift) .* x_gain; identity when empty.
    Eigen::RowVectorXd x_shift, x_gain;
    std::vector<int> class_domain;
    AnnSettings settings;
    int epochs_run = 0;
    double best_val_accuracy = 0.0;

    std::vector<int> layer_sizes() const;
};

struct AnnGradient {
    Eigen::MatrixXd W1, W2;
    Eigen::VectorXd b1, b2;
};

/// Xavier-uniform weights, zero biases.
AnnModel ann_init(int n_inputs, const std::vector<int>& class_domain, int hidden, std::uint64_t seed);
Eigen::VectorXd ann_forward(const AnnModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);
/// Mean binary cross-entropy against one-hot targets over the given rows.
double ann_loss(const AnnModel& model, const RowMatrix& X, const std::vector<int>& y);
/// Gradient of ann_loss by backpropagation.
AnnGradient ann_gradient(const AnnModel& model, const RowMatrix& X, const std::vector<int>& y);

/// Mini-batch gradient descent with early stopping on the validation rows
/// (skipped when Xval is empty). Throws NumericalError on a non-finite loss.
AnnModel ann_train(const RowMatrix& X, const std::vector<int>& y, const RowMatrix& Xval, const std::vector<int>& yval,
                   const std::vector<int>& class_domain, const AnnSettings& settings, std::uint64_t seed);
int ann_predict(const AnnModel& model, const Eigen::Ref<const Eigen::VectorXd>& query);
std::vector<int> ann_predict_batch(const AnnModel& model, const RowMatrix& queries);

double accuracy(const std::vector<int>& preds, const std::vector<int>& labels);

struct ConfusionMatrix {
    std::vector<int> class_domain;
    std::vector<std::vector<long>> counts;  // [actual][predicted]

    long total() const;
    double total_accuracy() const;
    /// NaN for a class with no actual members.
    double recall(std::size_t i) const;
};

ConfusionMatrix confusion(const std::vector<int>& preds, const std::vector<int>& labels, const std::vector<int>& class_domain);

RowMatrix take_rows(const RowMatrix& X, const std::vector<std::size_t>& idx);
std::vector<int> take(const std::vector<int>& v, const std::vector<std::size_t>& idx);

} // namespace pfl
