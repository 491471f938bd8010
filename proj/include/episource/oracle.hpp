#pragma once

#include <cstdint>
#include <stdexcept>

#include "episource/estimators.hpp"
#include "episource/network.hpp"
#include "episource/spreading.hpp"

namespace episource {

// Limits for exhaustive enumeration; exceeding any of them raises
// budget_error rather than returning a partial answer.
struct enumeration_budget
{
    int max_nodes = 10;
    int max_steps = 4;
    std::uint64_t max_branches = 10000000;
};

class budget_error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Exact P(ever-infected set at T equals snapshot | source) by enumerating
// every per-step joint outcome (infection successes x recoveries) of the
// synchronous process, with memoization on (state, remaining steps).
double exact_likelihood(const static_network& g, const spreading_params& params,
                        node_id source, const snapshot& snap,
                        const enumeration_budget& budget = {});

// Normalizes exact_likelihood over all ever-infected candidates under a
// uniform source prior.
posterior exact_posterior(const static_network& g, const spreading_params& params,
                          const snapshot& snap, const enumeration_budget& budget = {});

} // namespace episource
