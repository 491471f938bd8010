#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "episource/spreading.hpp"

namespace episource {

// Normalized distribution over candidate source nodes. When no candidate
// scored, the posterior is flagged undefined instead of being faked uniform.
struct posterior
{
    std::vector<node_id> candidates;  // ascending
    std::vector<double> probs;        // aligned with candidates
    bool undefined = false;

    // metadata
    std::uint64_t samples_per_candidate = 0;
    std::vector<std::uint64_t> hits;  // direct-MC match counts, empty otherwise
    double width = std::numeric_limits<double>::quiet_NaN(); // chosen soft-margin a
    bool converged = true;
    std::vector<node_id> ml_ties;     // argmax set when larger than one

    double prob_of(node_id v) const;
    // lowest id among tied maxima; -1 when undefined
    node_id ml_candidate() const;

    void save_json(const std::filesystem::path& path, const id_map& ids) const;
    void save_csv(const std::filesystem::path& path, const id_map& ids) const;
};

posterior posterior_from_scores(std::vector<node_id> candidates, const std::vector<double>& scores);
posterior posterior_from_hits(std::vector<node_id> candidates, std::vector<std::uint64_t> hits);

// |a ∩ b| / |a ∪ b| over sorted id vectors; both empty -> 1.
double jaccard(std::span<const node_id> a, std::span<const node_id> b);

// Jaccard after restricting both sides to the snapshot's observed mask;
// without a mask this is plain jaccard against the ever-infected set.
double partial_observation_similarity(const snapshot& snap, const sim_outcome& outcome);

struct direct_mc_config
{
    std::uint64_t n = 100000;   // simulations per candidate
    std::uint64_t seed = 0;
    std::size_t jobs = 0;
    // convergence diagnostic: TV between consecutive cumulative posteriors
    // below tv_tol for stable_checks checks in a row, and at least min_hits
    int batches = 10;
    double tv_tol = 0.01;
    int stable_checks = 3;
    std::uint64_t min_hits = 100;
};

// Exact-match Monte-Carlo posterior with lossless pruning.
posterior direct_mc(const sim_backend& sim, const snapshot& snap,
                    const std::vector<node_id>& candidates, const direct_mc_config& cfg);

// Per-candidate similarity values, one per simulation.
struct similarity_samples
{
    std::vector<node_id> candidates;
    std::vector<std::vector<double>> values; // values[i].size() == n for all i
};

struct soft_margin_config
{
    std::uint64_t n = 10000;
    std::uint64_t seed = 0;
    std::size_t jobs = 0;
    // bound cutoff: drop a sim once its best achievable weight at width
    // bound_width is below 1e-12; leaves estimates unchanged beyond that
    bool bound_pruning = false;
    double bound_width = 0.0;
};

similarity_samples draw_similarity_samples(const sim_backend& sim, const snapshot& snap,
                                           const std::vector<node_id>& candidates,
                                           const soft_margin_config& cfg);

// Gaussian-weighted likelihood (1/n) sum_i exp(-(x_i - 1)^2 / a^2).
double soft_margin(std::span<const double> similarities, double a);
std::vector<double> soft_margin(const similarity_samples& samples, double a);

// Descending width grid walked until the two half-sample posteriors stop
// agreeing; the chosen a is the smallest width of the converged prefix.
struct width_schedule
{
    std::vector<double> widths = {0.8, 0.4, 0.2, 0.1, 0.05, 0.025, 0.0125};
    double tolerance = 0.05;        // max abs per-candidate probability gap
    std::uint64_t min_samples = 100;

    void validate() const;
};

struct width_selection
{
    double width = 0.0;
    bool converged = false;
};

width_selection select_width(const similarity_samples& samples, const width_schedule& schedule);

posterior soft_margin_posterior(const similarity_samples& samples, double a);

posterior soft_margin_adaptive(const sim_backend& sim, const snapshot& snap,
                               const std::vector<node_id>& candidates,
                               const soft_margin_config& cfg, const width_schedule& schedule);

// Soft-margin posterior with the start day of every simulation drawn
// uniformly from [t0 - epsilon, t0 + epsilon].
posterior marginalize_t0(const temporal_network& tn, const temporal_params& params,
                         std::int32_t epsilon, const snapshot& snap,
                         const std::vector<node_id>& candidates,
                         const soft_margin_config& cfg, const width_schedule& schedule);

// Soft-margin posterior with (p,q) of every simulation drawn from the prior.
posterior marginalize_pq(const static_network& g, const spreading_params& params,
                         const pq_prior& prior, const snapshot& snap,
                         const std::vector<node_id>& candidates,
                         const soft_margin_config& cfg, const width_schedule& schedule);

// Uniform over the candidates minimizing the maximum distance to the
// infected nodes; candidates that cannot reach every infected node get
// infinite eccentricity.
posterior jordan_center(const static_network& g, const snapshot& snap);

// Uniform over the ever-infected candidates.
posterior random_estimator(const snapshot& snap, std::uint64_t seed);

// Uniform draw from the candidate set; the reporting convention for the
// random baseline, which would otherwise degenerate under lowest-id
// tie-breaking.
node_id random_pick(const snapshot& snap, std::uint64_t seed);

} // namespace episource
