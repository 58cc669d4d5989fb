#include "fedhar/gbdt/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numeric>
#include <sstream>

#include "fedhar/errors.hpp"
#include "fedhar/rng.hpp"

namespace fedhar::gbdt {

void GbdtConfig::validate() const {
    if (n_trees < 1) throw ConfigError("gbdt: n_trees must be >= 1");
    if (max_depth < 1) throw ConfigError("gbdt: max_depth must be >= 1");
    if (!(learning_rate > 0.0)) throw ConfigError("gbdt: learning_rate must be positive");
    if (min_samples_leaf < 1) throw ConfigError("gbdt: min_samples_leaf must be >= 1");
    if (!(subsample > 0.0 && subsample <= 1.0)) {
        throw ConfigError("gbdt: subsample must be in (0,1]");
    }
    if (leaf_penalty < 0.0) throw ConfigError("gbdt: leaf_penalty must be >= 0");
}

double Tree::value_at(std::span<const double> x) const {
    int node = 0;
    while (!nodes[static_cast<std::size_t>(node)].is_leaf) {
        const TreeNode& n = nodes[static_cast<std::size_t>(node)];
        node = x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(node)].leaf_value;
}

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double mean_logloss(std::span<const double> margins, std::span<const int> labels) {
    double acc = 0.0;
    for (std::size_t i = 0; i < margins.size(); ++i) {
        double p = sigmoid(margins[i]);
        p = std::clamp(p, 1e-15, 1.0 - 1e-15);
        acc += labels[i] ? -std::log(p) : -std::log(1.0 - p);
    }
    return acc / static_cast<double>(margins.size());
}

struct SplitResult {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

// Gain of splitting (G,H) into (G_L,H_L) and the complement, with L2 leaf
// penalty lambda. Shared by training and the stump-oracle tests.
double split_gain(double gl, double hl, double gr, double hr, double lambda) {
    auto score = [lambda](double g, double h) { return g * g / (h + lambda); };
    return 0.5 * (score(gl, hl) + score(gr, hr) - score(gl + gr, hl + hr));
}

// Exact greedy search over (feature, midpoint threshold). Features are
// scanned in parallel; the final reduce walks feature order, so ties resolve
// to the lowest feature index and lowest threshold independent of threads.
SplitResult find_best_split(const std::vector<std::vector<double>>& rows,
                            std::span<const double> grad, std::span<const double> hess,
                            const std::vector<std::size_t>& node_rows,
                            std::size_t min_samples_leaf, double lambda) {
    const std::size_t d = rows[0].size();
    std::vector<SplitResult> per_feature(d);

#pragma omp parallel for schedule(static)
    for (std::int64_t fi = 0; fi < static_cast<std::int64_t>(d); ++fi) {
        const auto f = static_cast<std::size_t>(fi);
        std::vector<std::size_t> order = node_rows;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (rows[a][f] != rows[b][f]) return rows[a][f] < rows[b][f];
            return a < b;
        });

        double g_total = 0.0, h_total = 0.0;
        for (std::size_t r : order) {
            g_total += grad[r];
            h_total += hess[r];
        }

        SplitResult best;
        double gl = 0.0, hl = 0.0;
        for (std::size_t i = 0; i + 1 < order.size(); ++i) {
            gl += grad[order[i]];
            hl += hess[order[i]];
            const double left_val = rows[order[i]][f];
            const double right_val = rows[order[i + 1]][f];
            if (left_val == right_val) continue;  // not a real boundary
            const std::size_t n_left = i + 1;
            const std::size_t n_right = order.size() - n_left;
            if (n_left < min_samples_leaf || n_right < min_samples_leaf) continue;
            const double gain = split_gain(gl, hl, g_total - gl, h_total - hl, lambda);
            if (!best.found || gain > best.gain) {
                best.found = true;
                best.feature = static_cast<int>(f);
                best.threshold = 0.5 * (left_val + right_val);
                best.gain = gain;
            }
        }
        per_feature[f] = best;
    }

    SplitResult best;
    for (const auto& cand : per_feature) {
        if (cand.found && (!best.found || cand.gain > best.gain)) best = cand;
    }
    return best;
}

struct Builder {
    const std::vector<std::vector<double>>& rows;
    std::span<const double> grad;
    std::span<const double> hess;
    const GbdtConfig& cfg;
    Tree tree;

    int build(const std::vector<std::size_t>& node_rows, std::size_t depth) {
        double g = 0.0, h = 0.0;
        for (std::size_t r : node_rows) {
            g += grad[r];
            h += hess[r];
        }

        SplitResult split;
        if (depth < cfg.max_depth && node_rows.size() >= 2 * cfg.min_samples_leaf) {
            split = find_best_split(rows, grad, hess, node_rows, cfg.min_samples_leaf,
                                    cfg.leaf_penalty);
        }

        const int id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();

        if (!split.found || split.gain <= 0.0) {
            tree.nodes[static_cast<std::size_t>(id)].is_leaf = true;
            tree.nodes[static_cast<std::size_t>(id)].leaf_value =
                -g / (h + cfg.leaf_penalty);
            return id;
        }

        std::vector<std::size_t> left_rows, right_rows;
        for (std::size_t r : node_rows) {
            (rows[r][static_cast<std::size_t>(split.feature)] < split.threshold ? left_rows
                                                                                : right_rows)
                .push_back(r);
        }

        const int left = build(left_rows, depth + 1);
        const int right = build(right_rows, depth + 1);
        TreeNode& n = tree.nodes[static_cast<std::size_t>(id)];
        n.is_leaf = false;
        n.feature = split.feature;
        n.threshold = split.threshold;
        n.left = left;
        n.right = right;
        return id;
    }
};

}  // namespace

GbdtModel train(const std::vector<std::vector<double>>& rows, std::span<const int> labels,
                const GbdtConfig& cfg) {
    cfg.validate();
    if (rows.empty() || rows.size() != labels.size()) {
        throw DataError("gbdt: rows and labels must be nonempty and equal-sized");
    }
    const std::size_t d = rows[0].size();
    if (d == 0) throw DataError("gbdt: empty feature vectors");
    for (const auto& r : rows) {
        if (r.size() != d) throw ShapeError("gbdt: ragged feature matrix");
    }
    std::size_t positives = 0;
    for (int y : labels) {
        if (y != 0 && y != 1) throw DataError("gbdt: labels must be 0/1");
        positives += static_cast<std::size_t>(y);
    }
    if (positives == 0 || positives == labels.size()) {
        throw DataError("gbdt: training rows contain a single class");
    }

    const std::size_t n = rows.size();
    GbdtModel model;
    model.learning_rate_ = cfg.learning_rate;
    model.n_features_ = d;

    // Base score is the log-odds of the positive prior.
    const double prior = static_cast<double>(positives) / static_cast<double>(n);
    model.base_score_ = std::log(prior / (1.0 - prior));

    std::vector<double> margin(n, model.base_score_);
    std::vector<double> grad(n), hess(n);
    model.train_logloss_.push_back(mean_logloss(margin, labels));

    Rng rng(derive_seed(cfg.rng_seed, "gbdt-subsample"));

    for (std::size_t t = 0; t < cfg.n_trees; ++t) {
        for (std::size_t i = 0; i < n; ++i) {
            const double p = sigmoid(margin[i]);
            grad[i] = p - static_cast<double>(labels[i]);
            hess[i] = p * (1.0 - p);
        }

        std::vector<std::size_t> tree_rows;
        if (cfg.subsample < 1.0) {
            const auto take = std::max<std::size_t>(
                1, static_cast<std::size_t>(std::floor(cfg.subsample * static_cast<double>(n))));
            tree_rows = rng.sample_without_replacement(n, take);
            std::sort(tree_rows.begin(), tree_rows.end());
        } else {
            tree_rows.resize(n);
            std::iota(tree_rows.begin(), tree_rows.end(), 0);
        }

        Builder builder{rows, grad, hess, cfg, {}};
        builder.build(tree_rows, 0);
        model.trees_.push_back(std::move(builder.tree));

        const Tree& tree = model.trees_.back();
        for (std::size_t i = 0; i < n; ++i) {
            margin[i] += cfg.learning_rate * tree.value_at(rows[i]);
        }
        model.train_logloss_.push_back(mean_logloss(margin, labels));
    }
    return model;
}

double GbdtModel::predict_margin(std::span<const double> x) const {
    if (x.size() != n_features_) {
        throw ShapeError("gbdt: expected " + std::to_string(n_features_) +
                         " features, got " + std::to_string(x.size()));
    }
    double acc = base_score_;
    for (const Tree& t : trees_) acc += learning_rate_ * t.value_at(x);
    return acc;
}

double GbdtModel::predict_proba(std::span<const double> x) const {
    return sigmoid(predict_margin(x));
}

int GbdtModel::predict_label(std::span<const double> x, double threshold) const {
    return predict_proba(x) >= threshold ? 1 : 0;
}

namespace {

std::string hexd(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%a", v);
    return buf;
}

double parse_hexd(const std::string& s) {
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str()) throw IoError("gbdt dump: bad float '" + s + "'");
    return v;
}

}  // namespace

std::string GbdtModel::to_text() const {
    std::ostringstream os;
    os << "gbdt v1\n";
    os << "base_score " << hexd(base_score_) << "\n";
    os << "learning_rate " << hexd(learning_rate_) << "\n";
    os << "n_features " << n_features_ << "\n";
    os << "trees " << trees_.size() << "\n";
    for (std::size_t t = 0; t < trees_.size(); ++t) {
        os << "tree " << t << " nodes " << trees_[t].nodes.size() << "\n";
        for (std::size_t i = 0; i < trees_[t].nodes.size(); ++i) {
            const TreeNode& n = trees_[t].nodes[i];
            if (n.is_leaf) {
                os << "node " << i << " leaf " << hexd(n.leaf_value) << "\n";
            } else {
                os << "node " << i << " split " << n.feature << " " << hexd(n.threshold)
                   << " left " << n.left << " right " << n.right << "\n";
            }
        }
    }
    return os.str();
}

GbdtModel GbdtModel::from_text(const std::string& text) {
    std::istringstream is(text);
    std::string tok;

    auto expect = [&](const char* word) {
        is >> tok;
        if (tok != word) throw IoError(std::string("gbdt dump: expected '") + word +
                                       "', got '" + tok + "'");
    };

    expect("gbdt");
    is >> tok;
    if (tok != "v1") throw IoError("gbdt dump: unsupported version " + tok);

    GbdtModel model;
    expect("base_score");
    is >> tok;
    model.base_score_ = parse_hexd(tok);
    expect("learning_rate");
    is >> tok;
    model.learning_rate_ = parse_hexd(tok);
    expect("n_features");
    is >> model.n_features_;
    expect("trees");
    std::size_t n_trees = 0;
    is >> n_trees;

    model.trees_.resize(n_trees);
    for (std::size_t t = 0; t < n_trees; ++t) {
        expect("tree");
        std::size_t idx = 0;
        is >> idx;
        expect("nodes");
        std::size_t n_nodes = 0;
        is >> n_nodes;
        model.trees_[t].nodes.resize(n_nodes);
        for (std::size_t i = 0; i < n_nodes; ++i) {
            expect("node");
            std::size_t node_idx = 0;
            is >> node_idx >> tok;
            TreeNode& n = model.trees_[t].nodes[node_idx];
            if (tok == "leaf") {
                is >> tok;
                n.is_leaf = true;
                n.leaf_value = parse_hexd(tok);
            } else if (tok == "split") {
                n.is_leaf = false;
                is >> n.feature >> tok;
                n.threshold = parse_hexd(tok);
                expect("left");
                is >> n.left;
                expect("right");
                is >> n.right;
            } else {
                throw IoError("gbdt dump: bad node kind '" + tok + "'");
            }
        }
    }
    if (!is) throw IoError("gbdt dump: truncated input");
    return model;
}

void LogisticRegression::fit(const std::vector<std::vector<double>>& rows,
                             std::span<const int> labels, std::size_t iterations,
                             double learning_rate) {
    if (rows.empty() || rows.size() != labels.size()) {
        throw DataError("logreg: rows and labels must be nonempty and equal-sized");
    }
    const std::size_t d = rows[0].size();
    const std::size_t n = rows.size();
    weights_.assign(d, 0.0);
    bias_ = 0.0;

    std::vector<double> gw(d);
    for (std::size_t it = 0; it < iterations; ++it) {
        std::fill(gw.begin(), gw.end(), 0.0);
        double gb = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double z = bias_;
            for (std::size_t j = 0; j < d; ++j) z += weights_[j] * rows[i][j];
            const double err = sigmoid(z) - static_cast<double>(labels[i]);
            for (std::size_t j = 0; j < d; ++j) gw[j] += err * rows[i][j];
            gb += err;
        }
        const double scale = learning_rate / static_cast<double>(n);
        for (std::size_t j = 0; j < d; ++j) weights_[j] -= scale * gw[j];
        bias_ -= scale * gb;
    }
}

double LogisticRegression::predict_proba(std::span<const double> x) const {
    if (x.size() != weights_.size()) throw ShapeError("logreg: feature length mismatch");
    double z = bias_;
    for (std::size_t j = 0; j < x.size(); ++j) z += weights_[j] * x[j];
    return sigmoid(z);
}

int LogisticRegression::predict_label(std::span<const double> x, double threshold) const {
    return predict_proba(x) >= threshold ? 1 : 0;
}

}  // namespace fedhar::gbdt
