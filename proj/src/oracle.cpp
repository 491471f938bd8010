#include "episource/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>
#include <unordered_map>
#include <vector>

namespace episource {

namespace {

// Kahan sum; branch weights vary over many orders of magnitude.
class compensated_sum
{
public:
    void add(double x)
    {
        double y = x - c_;
        double t = sum_ + y;
        c_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const { return sum_; }

private:
    double sum_ = 0.0;
    double c_ = 0.0;
};

struct state_key
{
    std::uint64_t infected;
    std::uint64_t ever;
    int steps;

    bool operator==(const state_key&) const = default;
};

struct state_key_hash
{
    std::size_t operator()(const state_key& k) const
    {
        std::uint64_t h = mix64(k.infected + 0x9e3779b97f4a7c15ULL);
        h = mix64(h ^ k.ever);
        return mix64(h + static_cast<std::uint64_t>(k.steps));
    }
};

class enumerator
{
public:
    enumerator(const static_network& g, const spreading_params& params, std::uint64_t snap_mask,
               const enumeration_budget& budget)
        : p_(params.p), q_(params.q), snap_(snap_mask), budget_(budget)
    {
        neighbor_masks_.resize(static_cast<std::size_t>(g.node_count()), 0);
        for (node_id u = 0; u < g.node_count(); ++u)
            for (node_id v : g.neighbors(u))
                neighbor_masks_[u] |= std::uint64_t(1) << v;
        node_mask_ = g.node_count() == 64 ? ~std::uint64_t(0)
                                          : (std::uint64_t(1) << g.node_count()) - 1;
    }

    double likelihood(node_id source, int steps)
    {
        std::uint64_t src = std::uint64_t(1) << source;
        if (!(snap_ & src))
            return 0.0; // the source is always ever-infected
        return solve(src, src, steps);
    }

private:
    double solve(std::uint64_t infected, std::uint64_t ever, int steps)
    {
        if (ever & ~snap_)
            return 0.0;
        if (infected == 0 || steps == 0)
            return ever == snap_ ? 1.0 : 0.0;

        state_key key{infected, ever, steps};
        if (auto it = memo_.find(key); it != memo_.end())
            return it->second;

        // per-target count of infection attempts from the infected set
        std::uint64_t susceptible = node_mask_ & ~ever;
        std::vector<node_id> targets;
        std::vector<int> attempts;
        double dead_weight = 1.0; // all attempts on out-of-snapshot nodes must fail
        for (std::uint64_t rest = susceptible; rest;) {
            node_id v = static_cast<node_id>(std::countr_zero(rest));
            rest &= rest - 1;
            int c = std::popcount(neighbor_masks_[v] & infected);
            if (c == 0)
                continue;
            if (snap_ & (std::uint64_t(1) << v)) {
                targets.push_back(v);
                attempts.push_back(c);
            } else {
                dead_weight *= std::pow(1.0 - p_, c);
            }
        }
        if (dead_weight == 0.0) {
            memo_.emplace(key, 0.0);
            return 0.0;
        }

        std::vector<node_id> infected_list;
        for (std::uint64_t rest = infected; rest;) {
            infected_list.push_back(static_cast<node_id>(std::countr_zero(rest)));
            rest &= rest - 1;
        }

        std::uint64_t infection_subsets = std::uint64_t(1) << targets.size();
        std::uint64_t recovery_subsets = std::uint64_t(1) << infected_list.size();
        charge(infection_subsets * recovery_subsets);

        compensated_sum sum;
        for (std::uint64_t inf_bits = 0; inf_bits < infection_subsets; ++inf_bits) {
            double w_inf = dead_weight;
            std::uint64_t newly = 0;
            for (std::size_t i = 0; i < targets.size(); ++i) {
                double hit = 1.0 - std::pow(1.0 - p_, attempts[i]);
                if (inf_bits & (std::uint64_t(1) << i)) {
                    w_inf *= hit;
                    newly |= std::uint64_t(1) << targets[i];
                } else {
                    w_inf *= 1.0 - hit;
                }
            }
            if (w_inf == 0.0)
                continue;
            for (std::uint64_t rec_bits = 0; rec_bits < recovery_subsets; ++rec_bits) {
                double w = w_inf;
                std::uint64_t recovered = 0;
                for (std::size_t i = 0; i < infected_list.size(); ++i) {
                    if (rec_bits & (std::uint64_t(1) << i)) {
                        w *= q_;
                        recovered |= std::uint64_t(1) << infected_list[i];
                    } else {
                        w *= 1.0 - q_;
                    }
                }
                if (w == 0.0)
                    continue;
                sum.add(w * solve((infected & ~recovered) | newly, ever | newly, steps - 1));
            }
        }

        double value = sum.value();
        memo_.emplace(key, value);
        return value;
    }

    void charge(std::uint64_t branches)
    {
        branches_ += branches;
        if (branches_ > budget_.max_branches)
            throw budget_error("enumeration exceeded the branch budget (" +
                               std::to_string(budget_.max_branches) + ")");
    }

    double p_;
    double q_;
    std::uint64_t snap_;
    std::uint64_t node_mask_;
    enumeration_budget budget_;
    std::vector<std::uint64_t> neighbor_masks_;
    std::unordered_map<state_key, double, state_key_hash> memo_;
    std::uint64_t branches_ = 0;
};

std::uint64_t snapshot_mask(const snapshot& snap)
{
    std::uint64_t mask = 0;
    for (node_id v : snap.ever_infected())
        mask |= std::uint64_t(1) << v;
    return mask;
}

void check_budget(const static_network& g, const spreading_params& params,
                  const enumeration_budget& budget)
{
    if (g.node_count() > budget.max_nodes || g.node_count() > 64)
        throw budget_error("instance has " + std::to_string(g.node_count()) +
                           " nodes, budget allows " + std::to_string(std::min(budget.max_nodes, 64)));
    if (params.steps > budget.max_steps)
        throw budget_error("instance runs " + std::to_string(params.steps) +
                           " steps, budget allows " + std::to_string(budget.max_steps));
}

} // namespace

double exact_likelihood(const static_network& g, const spreading_params& params,
                        node_id source, const snapshot& snap, const enumeration_budget& budget)
{
    params.validate();
    check_budget(g, params, budget);
    if (source < 0 || source >= g.node_count())
        throw std::invalid_argument("source out of range");
    if (snap.node_count() != g.node_count())
        throw std::invalid_argument("snapshot node count does not match the network");

    enumerator en(g, params, snapshot_mask(snap), budget);
    return en.likelihood(source, params.steps);
}

posterior exact_posterior(const static_network& g, const spreading_params& params,
                          const snapshot& snap, const enumeration_budget& budget)
{
    params.validate();
    check_budget(g, params, budget);
    if (snap.ever_infected().empty())
        throw std::invalid_argument("snapshot must contain at least one infected node");

    enumerator en(g, params, snapshot_mask(snap), budget);
    std::vector<node_id> candidates = snap.ever_infected();
    std::vector<double> likelihoods;
    likelihoods.reserve(candidates.size());
    for (node_id c : candidates)
        likelihoods.push_back(en.likelihood(c, params.steps));
    return posterior_from_scores(std::move(candidates), likelihoods);
}

} // namespace episource
