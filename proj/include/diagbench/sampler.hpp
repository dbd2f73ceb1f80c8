#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "diagbench/error.hpp"
#include "diagbench/random.hpp"
#include "diagbench/scoring.hpp"

namespace diagbench {

// Difficulty-balanced cohort sampling: stratified initialization over
// difficulty quantiles, then greedy swap refinement of
// J(S) = |mu_S - mu| + lambda * |sigma_S - sigma|.

struct CorpusEntry {
    std::string id;
    int difficulty = 1; // element_count
};

struct CorpusStats {
    double mu = 0.0;
    double sigma = 0.0; // population std
};

inline CorpusStats corpus_stats(const std::vector<CorpusEntry>& corpus) {
    if (corpus.empty()) raise(ErrorKind::empty_subset, "corpus is empty");
    double sum = 0.0;
    for (const auto& e : corpus) sum += e.difficulty;
    const double mu = sum / static_cast<double>(corpus.size());
    double ss = 0.0;
    for (const auto& e : corpus) ss += (e.difficulty - mu) * (e.difficulty - mu);
    return {mu, std::sqrt(ss / static_cast<double>(corpus.size()))};
}

struct SamplerConfig {
    double kappa = 1.5;             // T2I 1.5, TI2I 1.8
    int strata_L = 7;               // T2I 7, TI2I 10
    double eps_k = 0.10;            // T2I 0.10, TI2I 0.05
    int max_rounds = 3;
    int proposals_per_round = 200;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(kappa > 0.0)) raise(ErrorKind::out_of_range, "kappa must be positive");
        if (strata_L < 1) raise(ErrorKind::out_of_range, "strata_L must be >= 1");
        if (!(eps_k > 0.0)) raise(ErrorKind::out_of_range, "eps_k must be positive");
    }
};

inline SamplerConfig sampler_defaults(TaskMode mode, std::uint64_t seed = 0) {
    SamplerConfig cfg;
    cfg.seed = seed;
    if (mode == TaskMode::TI2I) {
        cfg.kappa = 1.8;
        cfg.strata_L = 10;
        cfg.eps_k = 0.05;
    }
    return cfg;
}

inline constexpr int min_cohort_size = 5;
inline constexpr int max_cohort_size = 20;

struct CohortResult {
    std::vector<std::string> item_ids;
    double mu_S = 0.0;
    double sigma_S = 0.0;
    double J = 0.0;
    bool converged = false;
    std::uint64_t seed_used = 0;
};

// J(S) = |mu_S - mu| + lambda*|sigma_S - sigma| with population std.
inline double objective_J(const std::vector<int>& subset_difficulties, const CorpusStats& stats,
                          double lambda) {
    if (subset_difficulties.empty()) raise(ErrorKind::empty_subset, "subset is empty");
    double sum = 0.0;
    for (const int d : subset_difficulties) sum += d;
    const double mu_s = sum / static_cast<double>(subset_difficulties.size());
    double ss = 0.0;
    for (const int d : subset_difficulties) ss += (d - mu_s) * (d - mu_s);
    const double sigma_s = std::sqrt(ss / static_cast<double>(subset_difficulties.size()));
    return std::abs(mu_s - stats.mu) + lambda * std::abs(sigma_s - stats.sigma);
}

// lambda = kappa * sigma / (mu + 1e-6)
inline double adaptive_lambda(const CorpusStats& stats, double kappa) {
    if (stats.mu < 0.0) raise(ErrorKind::out_of_range, "mu must be >= 0");
    return kappa * stats.sigma / (stats.mu + 1e-6);
}

namespace sampler_detail {

// Quantile binning: stable sort by (difficulty, id), then L floor-split chunks.
inline std::vector<std::size_t> sorted_order(const std::vector<CorpusEntry>& corpus) {
    std::vector<std::size_t> order(corpus.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (corpus[a].difficulty != corpus[b].difficulty)
            return corpus[a].difficulty < corpus[b].difficulty;
        return corpus[a].id < corpus[b].id;
    });
    return order;
}

inline std::vector<std::vector<std::size_t>> quantile_strata(const std::vector<CorpusEntry>& corpus,
                                                             int L) {
    const auto order = sorted_order(corpus);
    const std::size_t M = order.size();
    std::vector<std::vector<std::size_t>> strata(static_cast<std::size_t>(L));
    for (int s = 0; s < L; ++s) {
        const std::size_t lo = M * static_cast<std::size_t>(s) / static_cast<std::size_t>(L);
        const std::size_t hi = M * static_cast<std::size_t>(s + 1) / static_cast<std::size_t>(L);
        for (std::size_t i = lo; i < hi; ++i)
            strata[static_cast<std::size_t>(s)].push_back(order[i]);
    }
    return strata;
}

struct RunningMoments {
    double sum = 0.0;
    double sumsq = 0.0;
    std::size_t k = 0;

    void add(int d) {
        sum += d;
        sumsq += static_cast<double>(d) * d;
        ++k;
    }
    void remove(int d) {
        sum -= d;
        sumsq -= static_cast<double>(d) * d;
        --k;
    }
    double j(const CorpusStats& stats, double lambda) const {
        const double mu_s = sum / static_cast<double>(k);
        const double var = std::max(0.0, sumsq / static_cast<double>(k) - mu_s * mu_s);
        return std::abs(mu_s - stats.mu) + lambda * std::abs(std::sqrt(var) - stats.sigma);
    }
    double mean() const { return sum / static_cast<double>(k); }
    double stddev() const {
        const double mu_s = mean();
        return std::sqrt(std::max(0.0, sumsq / static_cast<double>(k) - mu_s * mu_s));
    }
};

} // namespace sampler_detail

// Stage 1: quantile-bin difficulties into L strata and draw per-stratum
// allocations without replacement. With n >= L every stratum contributes
// floor(n/L), remainders topping up the leading strata; with n < L one item is
// drawn from each of n evenly spaced strata. Exhausted strata spill their
// deficit to the nearest non-empty stratum.
inline std::vector<std::string> stratified_init(const std::vector<CorpusEntry>& corpus, int n,
                                                int L, std::uint64_t seed) {
    if (n < min_cohort_size || n > max_cohort_size)
        raise(ErrorKind::invalid_cohort_size,
              "cohort size must be in [5,20], got " + std::to_string(n));
    if (static_cast<int>(corpus.size()) < n)
        raise(ErrorKind::corpus_too_small, "corpus smaller than requested cohort");
    if (L < 1) raise(ErrorKind::out_of_range, "strata_L must be >= 1");

    auto strata = sampler_detail::quantile_strata(corpus, L);
    std::vector<int> want(static_cast<std::size_t>(L), 0);
    if (n >= L) {
        const int base = n / L;
        const int rem = n % L;
        for (int s = 0; s < L; ++s) want[static_cast<std::size_t>(s)] = base + (s < rem ? 1 : 0);
    } else {
        for (int j = 0; j < n; ++j) {
            const int idx = (n == 1) ? (L - 1) / 2
                                     : static_cast<int>(std::llround(
                                           static_cast<double>(j) * (L - 1) / (n - 1)));
            want[static_cast<std::size_t>(idx)] += 1;
        }
    }

    // Spill deficits of thin strata to the nearest non-empty stratum.
    for (int s = 0; s < L; ++s) {
        const int have = static_cast<int>(strata[static_cast<std::size_t>(s)].size());
        int deficit = want[static_cast<std::size_t>(s)] - have;
        if (deficit <= 0) continue;
        want[static_cast<std::size_t>(s)] = have;
        for (int dist = 1; dist < L && deficit > 0; ++dist) {
            for (const int t : {s - dist, s + dist}) {
                if (t < 0 || t >= L || deficit <= 0) continue;
                const int room = static_cast<int>(strata[static_cast<std::size_t>(t)].size()) -
                                 want[static_cast<std::size_t>(t)];
                const int take = std::min(room, deficit);
                if (take > 0) {
                    want[static_cast<std::size_t>(t)] += take;
                    deficit -= take;
                }
            }
        }
        if (deficit > 0) raise(ErrorKind::corpus_too_small, "strata cannot cover cohort size");
    }

    std::mt19937_64 rng(seed);
    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int s = 0; s < L; ++s) {
        auto& pool = strata[static_cast<std::size_t>(s)];
        for (int k = 0; k < want[static_cast<std::size_t>(s)]; ++k) {
            const std::size_t pick = bounded(rng, pool.size());
            out.push_back(corpus[pool[pick]].id);
            pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
        }
    }
    return out;
}

// Stage 2: up to max_rounds * proposals_per_round uniformly random
// (in-set, out-set) swaps, accepted only when J strictly decreases; stops
// early once J <= eps = eps_k * sigma * (20/n). Fully determined by cfg.seed.
inline CohortResult refine_greedy(const std::vector<std::string>& initial,
                                  const std::vector<CorpusEntry>& corpus,
                                  const CorpusStats& stats, const SamplerConfig& cfg) {
    cfg.validate();
    if (initial.empty()) raise(ErrorKind::empty_subset, "initial cohort is empty");

    std::vector<std::size_t> in_set;
    std::vector<char> selected(corpus.size(), 0);
    for (const auto& id : initial) {
        bool found = false;
        for (std::size_t i = 0; i < corpus.size(); ++i) {
            if (corpus[i].id == id) {
                if (selected[i]) raise(ErrorKind::duplicate_id, "initial cohort repeats '" + id + "'");
                selected[i] = 1;
                in_set.push_back(i);
                found = true;
                break;
            }
        }
        if (!found) raise(ErrorKind::malformed_input, "initial id '" + id + "' not in corpus");
    }

    std::vector<std::size_t> out_set;
    for (std::size_t i = 0; i < corpus.size(); ++i)
        if (!selected[i]) out_set.push_back(i);

    sampler_detail::RunningMoments mom;
    for (const std::size_t i : in_set) mom.add(corpus[i].difficulty);

    const double lambda = adaptive_lambda(stats, cfg.kappa);
    const double eps =
        cfg.eps_k * stats.sigma * (20.0 / static_cast<double>(in_set.size()));

    double best_j = mom.j(stats, lambda);
    std::mt19937_64 rng(cfg.seed);
    bool converged = best_j <= eps;

    const long long budget =
        static_cast<long long>(cfg.max_rounds) * static_cast<long long>(cfg.proposals_per_round);
    for (long long p = 0; p < budget && !converged && !out_set.empty(); ++p) {
        const std::size_t ii = bounded(rng, in_set.size());
        const std::size_t oo = bounded(rng, out_set.size());
        const int d_in = corpus[in_set[ii]].difficulty;
        const int d_out = corpus[out_set[oo]].difficulty;
        mom.remove(d_in);
        mom.add(d_out);
        const double j_new = mom.j(stats, lambda);
        if (j_new < best_j) {
            best_j = j_new;
            std::swap(in_set[ii], out_set[oo]);
        } else {
            mom.remove(d_out);
            mom.add(d_in);
        }
        if (best_j <= eps) converged = true;
    }

    CohortResult result;
    result.item_ids.reserve(in_set.size());
    for (const std::size_t i : in_set) result.item_ids.push_back(corpus[i].id);
    result.mu_S = mom.mean();
    result.sigma_S = mom.stddev();
    result.J = best_j;
    result.converged = converged;
    result.seed_used = cfg.seed;
    return result;
}

// Both stages with mode defaults; the stratified stage and the refinement
// stage draw from seeds derived from the caller's seed.
inline CohortResult sample_cohort(const std::vector<CorpusEntry>& corpus, int n, TaskMode mode,
                                  std::uint64_t seed) {
    SamplerConfig cfg = sampler_defaults(mode, seed);
    const CorpusStats stats = corpus_stats(corpus);
    const auto initial = stratified_init(corpus, n, cfg.strata_L, derive_seed(seed, 1));
    cfg.seed = derive_seed(seed, 2);
    CohortResult result = refine_greedy(initial, corpus, stats, cfg);
    result.seed_used = seed;
    return result;
}

// ---- Monte-Carlo validation ----

struct McRow {
    int n = 0;
    double delta = 0.0;      // |mean of cohort means - mu|
    double sigma_mean = 0.0; // population std of cohort means
    double worst = 0.0;      // max |mu_S - mu|
};

struct McReport {
    std::vector<McRow> rows;
    int repeats = 0;
    std::uint64_t seed = 0;
};

// Repeats the sampler R times per n with derived seeds (seed + repeat index)
// and summarizes how well cohort means track the corpus mean.
inline McReport monte_carlo_validate(const std::vector<CorpusEntry>& corpus,
                                     const std::vector<int>& n_values, TaskMode mode, int R,
                                     std::uint64_t seed) {
    if (R < 1) raise(ErrorKind::out_of_range, "repeat count must be >= 1");
    const CorpusStats stats = corpus_stats(corpus);
    McReport report;
    report.repeats = R;
    report.seed = seed;
    for (const int n : n_values) {
        std::vector<double> means;
        means.reserve(static_cast<std::size_t>(R));
        double worst = 0.0;
        for (int rep = 0; rep < R; ++rep) {
            const CohortResult c =
                sample_cohort(corpus, n, mode, seed + static_cast<std::uint64_t>(rep));
            means.push_back(c.mu_S);
            worst = std::max(worst, std::abs(c.mu_S - stats.mu));
        }
        double sum = 0.0;
        for (const double m : means) sum += m;
        const double mean_of_means = sum / static_cast<double>(means.size());
        double ss = 0.0;
        for (const double m : means) ss += (m - mean_of_means) * (m - mean_of_means);
        McRow row;
        row.n = n;
        row.delta = std::abs(mean_of_means - stats.mu);
        row.sigma_mean = std::sqrt(ss / static_cast<double>(means.size()));
        row.worst = worst;
        report.rows.push_back(row);
    }
    return report;
}

} // namespace diagbench
