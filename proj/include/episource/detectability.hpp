#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "episource/estimators.hpp"
#include "episource/network.hpp"
#include "episource/spreading.hpp"

namespace episource {

// Shannon entropy normalized by ln(candidate count); 0 for a single
// candidate, 1 for the uniform distribution.
double normalized_entropy(const posterior& post);

enum class estimator_kind { direct, soft_margin, jordan, random };

const char* estimator_name(estimator_kind k);
estimator_kind estimator_from_name(const std::string& name);

struct detectability_record
{
    double p = 0.0;
    double q = 0.0;
    int steps = 0;
    int rows = 0;
    int cols = 0;
    int realization = 0;
    double entropy = 0.0; // NaN flags an undefined posterior
    std::string estimator;
    std::uint64_t n = 0;
    double width = 0.0;
    bool converged = false;

    std::string csv_row() const;
    static const char* csv_header(); // p,q,T,rows,cols,realization,H,D,estimator,n,a,converged
};

struct sweep_config
{
    int rows = 30;
    int cols = 30;
    int steps = 5;
    std::vector<double> p_grid;
    std::vector<double> q_grid;
    int realizations = 50;
    bool central_source = false; // otherwise uniform over nodes
    estimator_kind estimator = estimator_kind::soft_margin;
    std::uint64_t n = 10000; // simulations per candidate
    width_schedule schedule;
    std::uint64_t seed = 0;
    std::size_t jobs = 0;
    // snapshots smaller than this are re-drawn up to max_redraws times, then
    // accepted as-is (p=0 cells legitimately produce singletons)
    int min_snapshot = 2;
    int max_redraws = 20;
};

// One record per (q,p,realization), emitted in that order. Record k is a
// pure function of (config, k); skip_records resumes a partial sweep.
void lattice_sweep(const sweep_config& cfg,
                   const std::function<void(const detectability_record&)>& emit,
                   std::uint64_t skip_records = 0);

struct experiment_row
{
    int experiment = 0;
    node_id true_source = 0;
    node_id ml_candidate = 0;
    std::int32_t distance = -1; // -1 marks unreachable
    std::int32_t epsilon = 0;
    std::int32_t delta = 0;
    std::uint64_t n = 0;

    std::string csv_row() const;
    static const char* csv_header(); // experiment,true_source,ml_candidate,distance,epsilon,delta,n
};

struct experiment_report
{
    std::vector<experiment_row> rows;
    std::vector<double> fraction_at;   // index d = fraction of experiments at distance d
    double fraction_unreachable = 0.0;
    std::uint64_t redraws = 0;         // truth draws discarded for tiny snapshots

    double fraction_within(int d) const;
    std::string summary_json() const;
};

struct temporal_experiment_config
{
    double p = 0.3;
    double q = 0.01;
    std::int32_t t0_lo = 100;     // true start day drawn uniformly from [lo,hi]
    std::int32_t t0_hi = 200;
    std::int32_t t_end = 300;
    int experiments = 500;
    std::int32_t epsilon = 0;     // start-day uncertainty for the estimator
    std::int32_t delta = 0;       // bin width for timestamp randomization; 0 = off
    estimator_kind estimator = estimator_kind::soft_margin;
    std::uint64_t n = 20000;      // simulations per candidate
    width_schedule schedule;
    std::uint64_t seed = 0;
    std::size_t jobs = 0;
    std::int32_t eligibility_window = 30; // sources need a contact within this many days of t0
    int min_snapshot = 2;
    int max_redraws = 50;
};

// Per experiment: draw a true (t0, source), simulate the truth on tn, hand
// the estimator the (optionally bin-randomized) network and the snapshot,
// and record the aggregated-graph distance from the ML candidate to the true
// source. Truth draws depend only on (seed, experiment), so runs with
// different epsilon/delta see identical truths.
experiment_report temporal_experiment(
    const temporal_network& tn, const temporal_experiment_config& cfg,
    const std::function<void(const experiment_row&)>& emit = nullptr,
    std::uint64_t skip_rows = 0,
    std::optional<std::vector<experiment_row>> resumed_rows = std::nullopt);

} // namespace episource
