#pragma once

#include "pfl/classify.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace pfl {

enum class Algorithm { Knn, Ann };
std::string algorithm_name(Algorithm a);
Algorithm parse_algorithm(const std::string& name);

struct UqSpec {
    int runs = 1000;
    std::vector<double> noise_stds{0.0};
    std::vector<Algorithm> algorithms{Algorithm::Knn, Algorithm::Ann};
    std::uint64_t base_seed = 1;
    SplitSpec split;  // seed is replaced per run
    int knn_k = 2;
    Metric knn_metric = Metric::Cosine;
    AnnSettings ann;
    int threads = 0;  // 0: hardware concurrency, capped by PFL_THREADS

    void validate() const;
};

struct UqCell {
    Algorithm algorithm;
    double noise_std = 0.0;
    double mean = 0.0;
    double std = 0.0;
    int runs = 0;
    int failures = 0;
    std::vector<double> accuracies;  // indexed by run; NaN for failed runs
};

struct UqResult {
    std::vector<UqCell> cells;  // algorithm-major, then noise level
};

/// phi + N(0, std^2) entrywise, no clamping.
RowMatrix add_gaussian_noise(const RowMatrix& phi, double std, std::uint64_t seed);

/// g(phi) clipped to [0, 1].
RowMatrix features_from_phi(const RowMatrix& phi);

/// Worker count: `requested` (or hardware concurrency when 0), capped by PFL_THREADS.
int worker_count(int requested);

/// Monte Carlo over split/initialisation seeds and noise draws. Labels stay
/// fixed; noise is added to the whole phi matrix before splitting.
UqResult mc_accuracy(const UqSpec& spec, const RowMatrix& phi, const std::vector<int>& labels);

/// uq_report.csv: algorithm,noise_std,mean_acc,std_acc,runs
void write_uq_report(const std::filesystem::path& path, const UqResult& result);
/// uq_raw.csv: algorithm,noise_std,run,accuracy
void write_uq_raw(const std::filesystem::path& path, const UqResult& result);

} // namespace pfl
