#include "pfl/classify.hpp"

#include "pfl/errors.hpp"
#include "pfl/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace pfl {

namespace {

constexpr double kZeroNormShift = 1e-12;

std::vector<std::size_t> largest_remainder(const std::vector<double>& quota, std::size_t total)
{
    std::vector<std::size_t> out(quota.size());
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < quota.size(); ++i) {
        out[i] = static_cast<std::size_t>(std::floor(quota[i]));
        assigned += out[i];
    }
    std::vector<std::size_t> order(quota.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return quota[a] - std::floor(quota[a]) > quota[b] - std::floor(quota[b]);
    });
    for (std::size_t r = 0; assigned < total && r < order.size(); ++r, ++assigned)
        ++out[order[r]];
    return out;
}

Split split_groups(const std::vector<std::vector<std::size_t>>& groups, std::size_t m, const SplitSpec& spec)
{
    spec.validate();
    const double f = spec.train_val_fraction();
    const auto tv_total = static_cast<std::size_t>(std::llround(f * static_cast<double>(m)));
    const auto val_total = static_cast<std::size_t>(std::llround(spec.val_fraction_within * static_cast<double>(tv_total)));

    std::vector<double> q(groups.size());
    for (std::size_t c = 0; c < groups.size(); ++c)
        q[c] = f * static_cast<double>(groups[c].size());
    const auto tv = largest_remainder(q, tv_total);
    for (std::size_t c = 0; c < groups.size(); ++c)
        q[c] = spec.val_fraction_within * static_cast<double>(tv[c]);
    const auto val = largest_remainder(q, val_total);

    Rng rng(spec.seed);
    Split s;
    for (std::size_t c = 0; c < groups.size(); ++c) {
        auto idx = groups[c];
        shuffle_in_place(idx, rng);
        for (std::size_t i = 0; i < idx.size(); ++i) {
            if (i < val[c])
                s.val.push_back(idx[i]);
            else if (i < tv[c])
                s.train.push_back(idx[i]);
            else
                s.test.push_back(idx[i]);
        }
    }
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.val.begin(), s.val.end());
    std::sort(s.test.begin(), s.test.end());
    return s;
}

std::map<int, std::vector<std::size_t>> by_class(const std::vector<int>& labels)
{
    std::map<int, std::vector<std::size_t>> g;
    for (std::size_t i = 0; i < labels.size(); ++i)
        g[labels[i]].push_back(i);
    return g;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

std::vector<int> class_indices(const std::vector<int>& y, const std::vector<int>& domain)
{
    std::map<int, int> pos;
    for (std::size_t k = 0; k < domain.size(); ++k)
        pos[domain[k]] = static_cast<int>(k);
    std::vector<int> out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        const auto it = pos.find(y[i]);
        if (it == pos.end())
            throw DataError("label " + std::to_string(y[i]) + " is not in the class domain");
        out[i] = it->second;
    }
    return out;
}

struct ForwardCache {
    Eigen::MatrixXd Z1, A1, Z2, O;
};

RowMatrix scaled_inputs(const AnnModel& m, const Eigen::Ref<const RowMatrix>& X)
{
    if (m.x_shift.size() == 0)
        return X;
    return ((X.rowwise() - m.x_shift).array().rowwise() * m.x_gain.array()).matrix();
}

ForwardCache forward_batch(const AnnModel& m, const Eigen::Ref<const RowMatrix>& X)
{
    ForwardCache c;
    c.Z1 = (scaled_inputs(m, X) * m.W1.transpose()).rowwise() + m.b1.transpose();
    c.A1 = c.Z1.unaryExpr([](double z) { return sigmoid(z); });
    c.Z2 = (c.A1 * m.W2.transpose()).rowwise() + m.b2.transpose();
    c.O = c.Z2.unaryExpr([](double z) { return sigmoid(z); });
    return c;
}

double batch_loss(const ForwardCache& c, const std::vector<int>& cls, std::size_t offset, std::size_t n)
{
    double loss = 0.0;
    for (Eigen::Index i = 0; i < c.Z2.rows(); ++i)
        for (Eigen::Index k = 0; k < c.Z2.cols(); ++k) {
            const bool on = cls[offset + static_cast<std::size_t>(i)] == k;
            loss += on ? softplus(-c.Z2(i, k)) : softplus(c.Z2(i, k));
        }
    return loss / static_cast<double>(n);
}

AnnGradient backprop(const AnnModel& m, const Eigen::Ref<const RowMatrix>& X, const ForwardCache& c,
                     const std::vector<int>& cls, std::size_t offset, std::size_t n)
{
    Eigen::MatrixXd d2 = c.O;
    for (Eigen::Index i = 0; i < d2.rows(); ++i)
        d2(i, cls[offset + static_cast<std::size_t>(i)]) -= 1.0;
    d2 /= static_cast<double>(n);
    AnnGradient g;
    g.W2 = d2.transpose() * c.A1;
    g.b2 = d2.colwise().sum().transpose();
    const Eigen::MatrixXd d1 = (d2 * m.W2).cwiseProduct(c.A1.cwiseProduct((1.0 - c.A1.array()).matrix()));
    g.W1 = d1.transpose() * scaled_inputs(m, X);
    g.b1 = d1.colwise().sum().transpose();
    return g;
}

} // namespace

double SplitSpec::train_val_fraction() const
{
    static constexpr double kFractions[] = {0.65, 0.70, 0.75, 0.80, 0.85};
    if (comb < 1 || comb > 5)
        throw ConfigError("comb must be in 1..5, got " + std::to_string(comb));
    return kFractions[comb - 1];
}

void SplitSpec::validate() const
{
    train_val_fraction();
    if (!(val_fraction_within >= 0.0 && val_fraction_within < 1.0))
        throw ConfigError("val_fraction_within must lie in [0, 1)");
}

Split split(const std::vector<int>& labels, const SplitSpec& spec)
{
    const std::size_t m = labels.size();
    if (m < 10)
        throw SplitError("need at least 10 rows to split, got " + std::to_string(m));
    if (!spec.stratified)
        return split(m, spec);
    std::vector<std::vector<std::size_t>> groups;
    for (auto& [cls, idx] : by_class(labels)) {
        if (idx.size() < 3)
            throw SplitError("class " + std::to_string(cls) + " has " + std::to_string(idx.size()) +
                             " rows; stratification needs at least 3");
        groups.push_back(std::move(idx));
    }
    return split_groups(groups, m, spec);
}

Split split(std::size_t m_rows, const SplitSpec& spec)
{
    if (m_rows < 10)
        throw SplitError("need at least 10 rows to split, got " + std::to_string(m_rows));
    std::vector<std::size_t> all(m_rows);
    std::iota(all.begin(), all.end(), 0);
    return split_groups({all}, m_rows, spec);
}

double cosine_distance(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y)
{
    if (x.size() != y.size())
        throw DataError("cosine distance of vectors with different lengths");
    const double nx = x.norm(), ny = y.norm();
    if (nx == 0.0 || ny == 0.0)
        throw DataError("cosine distance undefined for a zero vector");
    return std::clamp(1.0 - x.dot(y) / (nx * ny), 0.0, 2.0);
}

double euclidean_distance(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y)
{
    if (x.size() != y.size())
        throw DataError("euclidean distance of vectors with different lengths");
    return (x - y).norm();
}

Metric parse_metric(const std::string& name)
{
    if (name == "cosine")
        return Metric::Cosine;
    if (name == "euclidean")
        return Metric::Euclidean;
    throw ConfigError("unknown metric '" + name + "'");
}

std::string metric_name(Metric m) { return m == Metric::Cosine ? "cosine" : "euclidean"; }

namespace {

// Rows with zero norm get a constant shift so the cosine is defined.
Eigen::VectorXd guarded(const Eigen::Ref<const Eigen::VectorXd>& x, Metric metric)
{
    if (metric == Metric::Cosine && x.norm() == 0.0)
        return x.array() + kZeroNormShift;
    return x;
}

double distance(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b, Metric metric)
{
    return metric == Metric::Cosine ? cosine_distance(a, b) : euclidean_distance(a, b);
}

/// Indices of the `k` nearest training rows, by (distance, index).
std::vector<std::size_t> nearest(const std::vector<double>& d, std::size_t k)
{
    std::vector<std::size_t> idx(d.size());
    std::iota(idx.begin(), idx.end(), 0);
    k = std::min(k, idx.size());
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                      [&](std::size_t a, std::size_t b) { return d[a] < d[b] || (d[a] == d[b] && a < b); });
    idx.resize(k);
    return idx;
}

int vote(const std::vector<std::size_t>& nn, const std::vector<int>& y, std::size_t k)
{
    std::map<int, int> count;
    int best = 0;
    for (std::size_t r = 0; r < k; ++r)
        best = std::max(best, ++count[y[nn[r]]]);
    for (std::size_t r = 0; r < k; ++r)
        if (count[y[nn[r]]] == best)
            return y[nn[r]];
    return y[nn[0]];
}

} // namespace

KnnModel knn_fit(const RowMatrix& X, const std::vector<int>& y, int k, Metric metric)
{
    if (static_cast<std::size_t>(X.rows()) != y.size())
        throw DataError("kNN training rows and labels differ in count");
    if (k < 1 || k > X.rows())
        throw ConfigError("k must lie in 1..training-set size");
    KnnModel m;
    m.k = k;
    m.metric = metric;
    m.X = X;
    m.y = y;
    for (Eigen::Index i = 0; i < m.X.rows(); ++i)
        m.X.row(i) = guarded(m.X.row(i).transpose(), metric).transpose();
    return m;
}

int knn_predict(const KnnModel& model, const Eigen::Ref<const Eigen::RowVectorXd>& query)
{
    if (model.X.rows() == 0)
        throw ConfigError("empty kNN model");
    const Eigen::VectorXd q = guarded(query.transpose(), model.metric);
    std::vector<double> d(static_cast<std::size_t>(model.X.rows()));
    for (Eigen::Index i = 0; i < model.X.rows(); ++i)
        d[static_cast<std::size_t>(i)] = distance(q, model.X.row(i).transpose(), model.metric);
    const auto k = static_cast<std::size_t>(model.k);
    return vote(nearest(d, k), model.y, k);
}

std::vector<int> knn_predict_batch(const KnnModel& model, const RowMatrix& queries)
{
    std::vector<int> out(static_cast<std::size_t>(queries.rows()));
    for (Eigen::Index i = 0; i < queries.rows(); ++i)
        out[static_cast<std::size_t>(i)] = knn_predict(model, queries.row(i));
    return out;
}

std::vector<double> knn_cross_validate(const RowMatrix& X, const std::vector<int>& y, const std::vector<int>& k_candidates,
                                       int folds, Metric metric, std::uint64_t seed)
{
    const auto m = static_cast<std::size_t>(X.rows());
    if (m != y.size())
        throw DataError("cross-validation rows and labels differ in count");
    if (folds < 2 || static_cast<std::size_t>(folds) > m)
        throw SplitError("cannot make " + std::to_string(folds) + " folds from " + std::to_string(m) + " rows");
    int kmax = 0;
    for (int k : k_candidates) {
        if (k < 1)
            throw ConfigError("k candidates must be >= 1");
        kmax = std::max(kmax, k);
    }

    Rng rng(seed);
    std::vector<int> fold_of(m);
    std::size_t counter = 0;
    for (auto& [cls, idx] : by_class(y)) {
        shuffle_in_place(idx, rng);
        for (std::size_t i : idx)
            fold_of[i] = static_cast<int>(counter++ % static_cast<std::size_t>(folds));
    }

    RowMatrix G(X.rows(), X.cols());
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        G.row(i) = guarded(X.row(i).transpose(), metric).transpose();

    std::vector<double> acc_sum(k_candidates.size(), 0.0);
    for (int f = 0; f < folds; ++f) {
        std::vector<std::size_t> train, val;
        for (std::size_t i = 0; i < m; ++i)
            (fold_of[i] == f ? val : train).push_back(i);
        if (static_cast<int>(train.size()) < kmax)
            throw SplitError("fold training set smaller than the largest k");
        std::vector<int> ytrain = take(y, train);
        std::vector<std::size_t> correct(k_candidates.size(), 0);
        std::vector<double> d(train.size());
        for (std::size_t v : val) {
            for (std::size_t t = 0; t < train.size(); ++t)
                d[t] = distance(G.row(static_cast<Eigen::Index>(v)).transpose(),
                                G.row(static_cast<Eigen::Index>(train[t])).transpose(), metric);
            const auto nn = nearest(d, static_cast<std::size_t>(kmax));
            for (std::size_t c = 0; c < k_candidates.size(); ++c)
                if (vote(nn, ytrain, static_cast<std::size_t>(k_candidates[c])) == y[v])
                    ++correct[c];
        }
        for (std::size_t c = 0; c < k_candidates.size(); ++c)
            acc_sum[c] += static_cast<double>(correct[c]) / static_cast<double>(val.size());
    }
    for (auto& a : acc_sum)
        a /= folds;
    return acc_sum;
}

std::vector<int> AnnModel::layer_sizes() const
{
    return {static_cast<int>(W1.cols()), static_cast<int>(W1.rows()), static_cast<int>(W2.rows())};
}

AnnModel ann_init(int n_inputs, const std::vector<int>& class_domain, int hidden, std::uint64_t seed)
{
    if (n_inputs < 1 || hidden < 1 || class_domain.size() < 2)
        throw ConfigError("ANN needs at least one input, one hidden unit and two classes");
    AnnModel m;
    m.class_domain = class_domain;
    m.settings.hidden = hidden;
    const auto C = static_cast<Eigen::Index>(class_domain.size());
    Rng rng(seed);
    auto fill = [&](Eigen::MatrixXd& W, Eigen::Index rows, Eigen::Index cols) {
        const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
        W.resize(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < cols; ++j)
                W(i, j) = (2.0 * uniform01(rng) - 1.0) * limit;
    };
    fill(m.W1, hidden, n_inputs);
    fill(m.W2, C, hidden);
    m.b1 = Eigen::VectorXd::Zero(hidden);
    m.b2 = Eigen::VectorXd::Zero(C);
    return m;
}

Eigen::VectorXd ann_forward(const AnnModel& model, const Eigen::Ref<const Eigen::VectorXd>& x)
{
    if (x.size() != model.W1.cols())
        throw DataError("ANN input has " + std::to_string(x.size()) + " features, model expects " +
                        std::to_string(model.W1.cols()));
    Eigen::VectorXd xs = x;
    if (model.x_shift.size() != 0)
        xs = (x.array() - model.x_shift.transpose().array()) * model.x_gain.transpose().array();
    const Eigen::VectorXd a1 = (model.W1 * xs + model.b1).unaryExpr([](double z) { return sigmoid(z); });
    return (model.W2 * a1 + model.b2).unaryExpr([](double z) { return sigmoid(z); });
}

double ann_loss(const AnnModel& model, const RowMatrix& X, const std::vector<int>& y)
{
    const auto cls = class_indices(y, model.class_domain);
    return batch_loss(forward_batch(model, X), cls, 0, cls.size());
}

AnnGradient ann_gradient(const AnnModel& model, const RowMatrix& X, const std::vector<int>& y)
{
    const auto cls = class_indices(y, model.class_domain);
    return backprop(model, X, forward_batch(model, X), cls, 0, cls.size());
}

AnnModel ann_train(const RowMatrix& X, const std::vector<int>& y, const RowMatrix& Xval, const std::vector<int>& yval,
                   const std::vector<int>& class_domain, const AnnSettings& settings, std::uint64_t seed)
{
    if (static_cast<std::size_t>(X.rows()) != y.size() || static_cast<std::size_t>(Xval.rows()) != yval.size())
        throw DataError("ANN rows and labels differ in count");
    if (X.rows() == 0)
        throw DataError("empty ANN training set");
    if (settings.batch_size < 1 || settings.max_epochs < 1 || settings.patience < 1 || !(settings.learning_rate > 0.0))
        throw ConfigError("invalid ANN training settings");

    Rng rng(derive_seed(seed, 1));
    AnnModel m = ann_init(static_cast<int>(X.cols()), class_domain, settings.hidden, derive_seed(seed, 0));
    m.settings = settings;
    if (settings.minmax_scaling) {
        m.x_shift = X.colwise().minCoeff();
        const Eigen::RowVectorXd range = X.colwise().maxCoeff() - m.x_shift;
        m.x_gain = range.unaryExpr([](double r) { return r > 0.0 ? 1.0 / r : 1.0; });
    }
    const auto cls = class_indices(y, class_domain);

    std::vector<std::size_t> order(static_cast<std::size_t>(X.rows()));
    std::iota(order.begin(), order.end(), 0);
    RowMatrix Xb;
    std::vector<int> cb;
    const auto bs = static_cast<std::size_t>(settings.batch_size);

    AnnModel best = m;
    double best_acc = -1.0;
    int wait = 0;
    for (int epoch = 1; epoch <= settings.max_epochs; ++epoch) {
        shuffle_in_place(order, rng);
        double loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += bs) {
            const std::size_t n = std::min(bs, order.size() - start);
            Xb.resize(static_cast<Eigen::Index>(n), X.cols());
            cb.resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                Xb.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(order[start + i]));
                cb[i] = cls[order[start + i]];
            }
            const ForwardCache fc = forward_batch(m, Xb);
            loss += batch_loss(fc, cb, 0, n) * static_cast<double>(n);
            const AnnGradient g = backprop(m, Xb, fc, cb, 0, n);
            m.W1 -= settings.learning_rate * g.W1;
            m.b1 -= settings.learning_rate * g.b1;
            m.W2 -= settings.learning_rate * g.W2;
            m.b2 -= settings.learning_rate * g.b2;
        }
        if (!std::isfinite(loss))
            throw NumericalError("ANN training loss became non-finite at epoch " + std::to_string(epoch));
        m.epochs_run = epoch;
        if (Xval.rows() == 0) {
            best = m;
            continue;
        }
        const double acc = accuracy(ann_predict_batch(m, Xval), yval);
        if (acc > best_acc) {
            best_acc = acc;
            best = m;
            wait = 0;
        } else if (++wait >= settings.patience) {
            break;
        }
    }
    best.epochs_run = m.epochs_run;
    best.best_val_accuracy = std::max(best_acc, 0.0);
    return best;
}

int ann_predict(const AnnModel& model, const Eigen::Ref<const Eigen::VectorXd>& query)
{
    const Eigen::VectorXd o = ann_forward(model, query);
    Eigen::Index k = 0;
    for (Eigen::Index i = 1; i < o.size(); ++i)
        if (o(i) > o(k))
            k = i;
    return model.class_domain[static_cast<std::size_t>(k)];
}

std::vector<int> ann_predict_batch(const AnnModel& model, const RowMatrix& queries)
{
    if (queries.rows() == 0)
        return {};
    if (queries.cols() != model.W1.cols())
        throw DataError("ANN input has " + std::to_string(queries.cols()) + " features, model expects " +
                        std::to_string(model.W1.cols()));
    const ForwardCache fc = forward_batch(model, queries);
    std::vector<int> out(static_cast<std::size_t>(queries.rows()));
    for (Eigen::Index i = 0; i < fc.O.rows(); ++i) {
        Eigen::Index k = 0;
        for (Eigen::Index j = 1; j < fc.O.cols(); ++j)
            if (fc.O(i, j) > fc.O(i, k))
                k = j;
        out[static_cast<std::size_t>(i)] = model.class_domain[static_cast<std::size_t>(k)];
    }
    return out;
}

double accuracy(const std::vector<int>& preds, const std::vector<int>& labels)
{
    if (preds.size() != labels.size())
        throw DataError("prediction and label counts differ");
    if (preds.empty())
        throw DataError("accuracy of an empty set");
    std::size_t ok = 0;
    for (std::size_t i = 0; i < preds.size(); ++i)
        ok += preds[i] == labels[i];
    return static_cast<double>(ok) / static_cast<double>(preds.size());
}

long ConfusionMatrix::total() const
{
    long t = 0;
    for (const auto& row : counts)
        for (long c : row)
            t += c;
    return t;
}

double ConfusionMatrix::total_accuracy() const
{
    long diag = 0;
    for (std::size_t i = 0; i < counts.size(); ++i)
        diag += counts[i][i];
    const long t = total();
    return t ? static_cast<double>(diag) / static_cast<double>(t) : std::numeric_limits<double>::quiet_NaN();
}

double ConfusionMatrix::recall(std::size_t i) const
{
    long row = 0;
    for (long c : counts.at(i))
        row += c;
    return row ? static_cast<double>(counts[i][i]) / static_cast<double>(row) : std::numeric_limits<double>::quiet_NaN();
}

ConfusionMatrix confusion(const std::vector<int>& preds, const std::vector<int>& labels, const std::vector<int>& class_domain)
{
    if (preds.size() != labels.size())
        throw DataError("prediction and label counts differ");
    ConfusionMatrix cm;
    cm.class_domain = class_domain;
    cm.counts.assign(class_domain.size(), std::vector<long>(class_domain.size(), 0));
    const auto a = class_indices(labels, class_domain);
    const auto p = class_indices(preds, class_domain);
    for (std::size_t i = 0; i < a.size(); ++i)
        ++cm.counts[static_cast<std::size_t>(a[i])][static_cast<std::size_t>(p[i])];
    return cm;
}

RowMatrix take_rows(const RowMatrix& X, const std::vector<std::size_t>& idx)
{
    RowMatrix out(static_cast<Eigen::Index>(idx.size()), X.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] >= static_cast<std::size_t>(X.rows()))
            throw DataError("row index out of range");
        out.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(idx[i]));
    }
    return out;
}

std::vector<int> take(const std::vector<int>& v, const std::vector<std::size_t>& idx)
{
    std::vector<int> out(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
        out[i] = v.at(idx[i]);
    return out;
}

} // namespace pfl
