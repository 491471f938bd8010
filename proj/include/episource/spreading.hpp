#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "episource/network.hpp"
#include "episource/rng.hpp"

namespace episource {

enum class model_kind { sir, si, ic };

const char* model_name(model_kind m);
model_kind model_from_name(const std::string& name);

// Discrete-time synchronous model on a static network. SI pins q=0, IC pins q=1.
struct spreading_params
{
    model_kind model = model_kind::sir;
    double p = 0.0;  // transmission probability per contact-step
    double q = 0.0;  // recovery probability per step
    int steps = 1;   // horizon T

    static spreading_params make(model_kind model, double p, double q, int steps);
    void validate() const;
};

// Event-driven model on a temporal network. q is a per-day hazard applied at
// day boundaries after that day's events.
struct temporal_params
{
    double p = 0.0;
    double q = 0.0;
    std::int32_t t0 = 0;
    std::int32_t t_end = 0;

    void validate() const;
};

// Observed realization: the set of ever-infected nodes, optionally restricted
// to a set of nodes whose states were observed at all.
class snapshot
{
public:
    snapshot() = default;
    snapshot(std::vector<node_id> ever_infected, node_id node_count,
             std::optional<std::vector<node_id>> observed = std::nullopt);

    const std::vector<node_id>& ever_infected() const { return ever_; }
    node_id node_count() const { return static_cast<node_id>(ever_mask_.size()); }
    bool has_mask() const { return observed_.has_value(); }
    const std::vector<node_id>& observed() const { return *observed_; }

    bool is_infected(node_id v) const { return ever_mask_[v] != 0; }
    bool is_observed(node_id v) const { return !observed_ || observed_mask_[v] != 0; }

    // Nodes whose infection contradicts this snapshot as an observation:
    // unobserved-infected nodes never contradict it.
    std::vector<std::uint8_t> forbidden_mask() const;

    void save(const std::filesystem::path& path, const id_map& ids) const;
    static snapshot load(const std::filesystem::path& path, const id_map& ids,
                         node_id node_count,
                         const std::optional<std::filesystem::path>& observed_path = std::nullopt);

private:
    std::vector<node_id> ever_;     // sorted
    std::optional<std::vector<node_id>> observed_;
    std::vector<std::uint8_t> ever_mask_;
    std::vector<std::uint8_t> observed_mask_;
};

struct sim_outcome
{
    std::vector<node_id> ever; // sorted ever-infected set
    bool pruned = false;       // terminated early against a prune target
};

// Early-termination policy for one simulation.
struct prune_spec
{
    // stop as soon as a node with forbidden[v] != 0 gets infected
    const std::uint8_t* forbidden = nullptr;
    // stop once the best achievable Jaccard against `target` drops below
    // x_floor (used by the soft-margin bound cutoff, off by default)
    const snapshot* target = nullptr;
    double x_floor = 0.0;
};

// Reusable per-worker buffers.
struct sim_scratch
{
    std::vector<std::uint8_t> state;
    std::vector<node_id> frontier;
    std::vector<node_id> next_frontier;
    std::vector<node_id> ever;
};

// One synchronous run. Per step, start-of-step infected nodes attempt each
// susceptible neighbor with probability p, then recover with probability q;
// new infections become infectious the next step and cannot recover in the
// step they were infected. step_sizes, when given, records the ever-infected
// count after every step.
sim_outcome simulate_static(const static_network& g, const spreading_params& params,
                            node_id source, rng_stream& rng,
                            const prune_spec* prune = nullptr,
                            sim_scratch* scratch = nullptr,
                            std::vector<int>* step_sizes = nullptr);

sim_outcome simulate_static(const static_network& g, const spreading_params& params,
                            node_id source, std::uint64_t seed,
                            const snapshot* prune_target = nullptr);

// One event-driven run over days [t0, t_end]: events of a day in file order,
// then every infected node recovers with probability q at the day boundary.
sim_outcome simulate_temporal(const temporal_network& tn, const temporal_params& params,
                              node_id source, rng_stream& rng,
                              const prune_spec* prune = nullptr,
                              sim_scratch* scratch = nullptr);

sim_outcome simulate_temporal(const temporal_network& tn, const temporal_params& params,
                              node_id source, std::uint64_t seed,
                              const snapshot* prune_target = nullptr);

// A weighted finite grid of (p,q) values; sims draw one point per run.
struct pq_prior
{
    std::vector<double> p, q, weight; // weights sum to 1
    void validate() const;
};

// Simulation capability handed to estimators. run() must depend only on
// (source, rng state, prune), never on shared mutable state.
class sim_backend
{
public:
    virtual ~sim_backend() = default;
    virtual node_id node_count() const = 0;
    virtual sim_outcome run(node_id source, rng_stream& rng, const prune_spec* prune,
                            sim_scratch& scratch) const = 0;
};

class static_backend final : public sim_backend
{
public:
    static_backend(const static_network& g, spreading_params params)
        : g_(&g), params_(params)
    {
        params_.validate();
    }

    // every sim draws its own (p,q) from the prior before running
    static_backend& with_pq_prior(pq_prior prior);

    node_id node_count() const override { return g_->node_count(); }
    sim_outcome run(node_id source, rng_stream& rng, const prune_spec* prune,
                    sim_scratch& scratch) const override;

private:
    const static_network* g_;
    spreading_params params_;
    std::optional<pq_prior> prior_;
};

class temporal_backend final : public sim_backend
{
public:
    temporal_backend(const temporal_network& tn, temporal_params params)
        : tn_(&tn), params_(params)
    {
        params_.validate();
    }

    // every sim draws its start day uniformly from [lo, hi] before running
    temporal_backend& with_t0_window(std::int32_t lo, std::int32_t hi);
    temporal_backend& with_pq_prior(pq_prior prior);

    node_id node_count() const override { return tn_->node_count; }
    sim_outcome run(node_id source, rng_stream& rng, const prune_spec* prune,
                    sim_scratch& scratch) const override;

private:
    const temporal_network* tn_;
    temporal_params params_;
    std::optional<std::pair<std::int32_t, std::int32_t>> t0_window_;
    std::optional<pq_prior> prior_;
};

// n independent outcomes; outcome i uses the stream derived from (seed, i),
// so the sequence is identical for any jobs count. jobs = 0 means all cores.
std::vector<sim_outcome> batch_simulate(const sim_backend& backend, node_id source,
                                        std::uint64_t n, std::uint64_t seed,
                                        const prune_spec* prune = nullptr,
                                        std::size_t jobs = 0);

} // namespace episource
