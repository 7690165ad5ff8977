#include "pfl/uq.hpp"

#include "pfl/constitutive.hpp"
#include "pfl/errors.hpp"
#include "pfl/io.hpp"
#include "pfl/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <iostream>
#include <limits>
#include <mutex>
#include <random>
#include <thread>

namespace pfl {

std::string algorithm_name(Algorithm a) { return a == Algorithm::Knn ? "knn" : "ann"; }

Algorithm parse_algorithm(const std::string& name)
{
    if (name == "knn")
        return Algorithm::Knn;
    if (name == "ann")
        return Algorithm::Ann;
    throw ConfigError("unknown algorithm '" + name + "'");
}

void UqSpec::validate() const
{
    if (runs < 1)
        throw ConfigError("runs must be >= 1");
    if (noise_stds.empty() || algorithms.empty())
        throw ConfigError("need at least one noise level and one algorithm");
    for (double s : noise_stds)
        if (!(s >= 0.0) || !std::isfinite(s))
            throw ConfigError("noise standard deviations must be finite and >= 0");
    split.validate();
}

RowMatrix add_gaussian_noise(const RowMatrix& phi, double std, std::uint64_t seed)
{
    if (!(std >= 0.0))
        throw ConfigError("noise standard deviation must be >= 0");
    if (std == 0.0)
        return phi;
    Rng rng(seed);
    std::normal_distribution<double> n(0.0, std);
    RowMatrix out = phi;
    for (Eigen::Index i = 0; i < out.size(); ++i)
        out.data()[i] += n(rng);
    return out;
}

RowMatrix features_from_phi(const RowMatrix& phi)
{
    return phi.unaryExpr([](double p) { return std::clamp(degradation(p), 0.0, 1.0); });
}

int worker_count(int requested)
{
    int n = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
    n = std::max(n, 1);
    if (const char* env = std::getenv("PFL_THREADS")) {
        const int cap = std::atoi(env);
        if (cap >= 1)
            n = std::min(n, cap);
    }
    return n;
}

namespace {

double one_run(const UqSpec& spec, Algorithm alg, const RowMatrix& X, const std::vector<int>& labels,
               const std::vector<int>& domain, std::uint64_t run_seed)
{
    SplitSpec ss = spec.split;
    ss.seed = derive_seed(run_seed, 0);
    const Split s = split(labels, ss);
    const RowMatrix Xtest = take_rows(X, s.test);
    const std::vector<int> ytest = take(labels, s.test);
    if (alg == Algorithm::Knn) {
        // kNN has no early stopping; validation rows join the training set.
        std::vector<std::size_t> tv = s.train;
        tv.insert(tv.end(), s.val.begin(), s.val.end());
        const KnnModel m = knn_fit(take_rows(X, tv), take(labels, tv), spec.knn_k, spec.knn_metric);
        return accuracy(knn_predict_batch(m, Xtest), ytest);
    }
    const AnnModel m = ann_train(take_rows(X, s.train), take(labels, s.train), take_rows(X, s.val), take(labels, s.val),
                                 domain, spec.ann, derive_seed(run_seed, 1));
    return accuracy(ann_predict_batch(m, Xtest), ytest);
}

} // namespace

UqResult mc_accuracy(const UqSpec& spec, const RowMatrix& phi, const std::vector<int>& labels)
{
    spec.validate();
    if (static_cast<std::size_t>(phi.rows()) != labels.size())
        throw DataError("UQ data and labels differ in row count");
    std::vector<int> domain = labels;
    std::sort(domain.begin(), domain.end());
    domain.erase(std::unique(domain.begin(), domain.end()), domain.end());

    const std::size_t n_levels = spec.noise_stds.size();
    const std::size_t n_alg = spec.algorithms.size();
    const auto runs = static_cast<std::size_t>(spec.runs);

    UqResult result;
    for (Algorithm a : spec.algorithms)
        for (double s : spec.noise_stds) {
            UqCell c;
            c.algorithm = a;
            c.noise_std = s;
            c.accuracies.assign(runs, std::numeric_limits<double>::quiet_NaN());
            result.cells.push_back(std::move(c));
        }

    // One task per (run, noise level); the noisy matrix is shared by the algorithms.
    const std::size_t n_tasks = runs * n_levels;
    std::atomic<std::size_t> next{0};
    std::mutex log_mutex;
    std::exception_ptr config_failure;
    auto worker = [&]() {
        for (std::size_t task = next++; task < n_tasks; task = next++) {
            const std::size_t r = task / n_levels, l = task % n_levels;
            const std::uint64_t run_seed = derive_seed(spec.base_seed, r);
            try {
                const RowMatrix X =
                    features_from_phi(add_gaussian_noise(phi, spec.noise_stds[l], derive_seed(run_seed, 2 + l)));
                for (std::size_t a = 0; a < n_alg; ++a) {
                    try {
                        result.cells[a * n_levels + l].accuracies[r] =
                            one_run(spec, spec.algorithms[a], X, labels, domain, run_seed);
                    } catch (const ConfigError&) {
                        throw;
                    } catch (const std::exception& e) {
                        std::lock_guard lock(log_mutex);
                        std::cerr << "warning: " << algorithm_name(spec.algorithms[a]) << " run " << r << " at noise "
                                  << spec.noise_stds[l] << " failed: " << e.what() << "\n";
                    }
                }
            } catch (const ConfigError&) {
                std::lock_guard lock(log_mutex);
                if (!config_failure)
                    config_failure = std::current_exception();
                next = n_tasks;
            }
        }
    };
    const int n_workers = std::min<int>(worker_count(spec.threads), static_cast<int>(n_tasks));
    std::vector<std::thread> pool;
    for (int i = 1; i < n_workers; ++i)
        pool.emplace_back(worker);
    worker();
    for (auto& t : pool)
        t.join();
    if (config_failure)
        std::rethrow_exception(config_failure);

    for (auto& c : result.cells) {
        double sum = 0.0, sum2 = 0.0;
        int ok = 0;
        for (double a : c.accuracies)
            if (std::isfinite(a)) {
                sum += a;
                ++ok;
            }
        c.runs = ok;
        c.failures = static_cast<int>(runs) - ok;
        if (static_cast<double>(c.failures) > 0.01 * static_cast<double>(runs))
            throw NumericalError(std::to_string(c.failures) + " of " + std::to_string(runs) + " " +
                                 algorithm_name(c.algorithm) + " runs failed at noise " +
                                 io::format_double(c.noise_std));
        c.mean = sum / ok;
        for (double a : c.accuracies)
            if (std::isfinite(a))
                sum2 += (a - c.mean) * (a - c.mean);
        c.std = ok > 1 ? std::sqrt(sum2 / (ok - 1)) : 0.0;
    }
    return result;
}

void write_uq_report(const std::filesystem::path& path, const UqResult& result)
{
    std::string out = "algorithm,noise_std,mean_acc,std_acc,runs\n";
    for (const auto& c : result.cells)
        out += algorithm_name(c.algorithm) + "," + io::format_double(c.noise_std) + "," + io::format_double(c.mean) + "," +
               io::format_double(c.std) + "," + std::to_string(c.runs) + "\n";
    io::write_file_atomic(path, out);
}

void write_uq_raw(const std::filesystem::path& path, const UqResult& result)
{
    std::string out = "algorithm,noise_std,run,accuracy\n";
    for (const auto& c : result.cells)
        for (std::size_t r = 0; r < c.accuracies.size(); ++r)
            out += algorithm_name(c.algorithm) + "," + io::format_double(c.noise_std) + "," + std::to_string(r) + "," +
                   io::format_double(c.accuracies[r]) + "\n";
    io::write_file_atomic(path, out);
}

} // namespace pfl
