#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fedhar::gbdt {

struct GbdtConfig {
    std::size_t n_trees = 100;
    std::size_t max_depth = 3;
    double learning_rate = 0.1;
    std::size_t min_samples_leaf = 5;
    double subsample = 1.0;     // row fraction per tree, (0,1]
    double leaf_penalty = 1.0;  // L2 penalty on leaf weights
    std::uint64_t rng_seed = 0;

    void validate() const;
};

// One node of an axis-aligned regression tree. Internal nodes route
// x[feature] < threshold to `left`, otherwise to `right`; leaves carry a
// log-odds increment.
struct TreeNode {
    bool is_leaf = true;
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double leaf_value = 0.0;
};

struct Tree {
    std::vector<TreeNode> nodes;
    double value_at(std::span<const double> x) const;
};

// Gradient-boosted trees for binary classification, fit to logistic loss
// with second-order (gradient + hessian) leaf statistics.
class GbdtModel {
public:
    double base_score() const { return base_score_; }
    double learning_rate() const { return learning_rate_; }
    std::size_t n_features() const { return n_features_; }
    std::size_t n_trees() const { return trees_.size(); }
    const std::vector<Tree>& trees() const { return trees_; }

    // base_score + lr * sum of leaf values.
    double predict_margin(std::span<const double> x) const;
    // sigmoid of the margin, in (0,1).
    double predict_proba(std::span<const double> x) const;
    // 1 iff predict_proba >= threshold.
    int predict_label(std::span<const double> x, double threshold = 0.5) const;

    // Mean training log-loss after each boosting iteration (index 0 is the
    // base score alone).
    const std::vector<double>& training_logloss() const { return train_logloss_; }

    // Textual tree dump; doubles are hexfloats so the round-trip is
    // bit-exact.
    std::string to_text() const;
    static GbdtModel from_text(const std::string& text);

    friend GbdtModel train(const std::vector<std::vector<double>>& rows,
                           std::span<const int> labels, const GbdtConfig& cfg);

private:
    std::vector<Tree> trees_;
    double base_score_ = 0.0;
    double learning_rate_ = 0.1;
    std::size_t n_features_ = 0;
    std::vector<double> train_logloss_;
};

// Fits cfg.n_trees boosted trees. Requires both labels present.
GbdtModel train(const std::vector<std::vector<double>>& rows, std::span<const int> labels,
                const GbdtConfig& cfg);

// Plain logistic regression behind the same predict surface, for ablation.
class LogisticRegression {
public:
    void fit(const std::vector<std::vector<double>>& rows, std::span<const int> labels,
             std::size_t iterations = 500, double learning_rate = 0.5);
    double predict_proba(std::span<const double> x) const;
    int predict_label(std::span<const double> x, double threshold = 0.5) const;

private:
    std::vector<double> weights_;
    double bias_ = 0.0;
};

}  // namespace fedhar::gbdt
