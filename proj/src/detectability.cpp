#include "episource/detectability.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace episource {

double normalized_entropy(const posterior& post)
{
    if (post.undefined)
        throw std::invalid_argument("entropy of an undefined posterior");
    if (post.candidates.empty())
        throw std::invalid_argument("entropy needs at least one candidate");
    std::size_t k = post.candidates.size();
    if (k == 1)
        return 0.0;
    double h = 0.0;
    for (double p : post.probs)
        if (p > 0.0)
            h -= p * std::log(p);
    return std::clamp(h / std::log(static_cast<double>(k)), 0.0, 1.0);
}

const char* estimator_name(estimator_kind k)
{
    switch (k) {
    case estimator_kind::direct: return "direct";
    case estimator_kind::soft_margin: return "soft-margin";
    case estimator_kind::jordan: return "jordan";
    case estimator_kind::random: return "random";
    }
    return "?";
}

estimator_kind estimator_from_name(const std::string& name)
{
    if (name == "direct")
        return estimator_kind::direct;
    if (name == "soft-margin")
        return estimator_kind::soft_margin;
    if (name == "jordan")
        return estimator_kind::jordan;
    if (name == "random")
        return estimator_kind::random;
    throw std::invalid_argument("unknown estimator '" + name +
                                "' (expected direct, soft-margin, jordan or random)");
}

namespace {

std::string fmt(double x)
{
    std::ostringstream out;
    out << std::setprecision(12) << x;
    return out.str();
}

} // namespace

const char* detectability_record::csv_header()
{
    return "p,q,T,rows,cols,realization,H,D,estimator,n,a,converged";
}

std::string detectability_record::csv_row() const
{
    std::ostringstream out;
    out << fmt(p) << "," << fmt(q) << "," << steps << "," << rows << "," << cols << ","
        << realization << "," << fmt(entropy) << "," << fmt(1.0 - entropy) << "," << estimator
        << "," << n << "," << fmt(width) << "," << (converged ? "true" : "false");
    return out.str();
}

const char* experiment_row::csv_header()
{
    return "experiment,true_source,ml_candidate,distance,epsilon,delta,n";
}

std::string experiment_row::csv_row() const
{
    std::ostringstream out;
    out << experiment << "," << true_source << "," << ml_candidate << "," << distance << ","
        << epsilon << "," << delta << "," << n;
    return out.str();
}

double experiment_report::fraction_within(int d) const
{
    double total = 0.0;
    for (int i = 0; i <= d && i < static_cast<int>(fraction_at.size()); ++i)
        total += fraction_at[i];
    return total;
}

std::string experiment_report::summary_json() const
{
    nlohmann::ordered_json doc;
    doc["experiments"] = rows.size();
    doc["fraction_at_distance"] = fraction_at;
    doc["fraction_unreachable"] = fraction_unreachable;
    doc["fraction_within_0"] = fraction_within(0);
    doc["fraction_within_1"] = fraction_within(1);
    doc["redraws"] = redraws;
    return doc.dump(2);
}

namespace {

struct drawn_truth
{
    node_id source = 0;
    std::int32_t t0 = 0;
    std::vector<node_id> ever;
    std::uint64_t redraws = 0;
};

} // namespace

void lattice_sweep(const sweep_config& cfg,
                   const std::function<void(const detectability_record&)>& emit,
                   std::uint64_t skip_records)
{
    if (cfg.p_grid.empty() || cfg.q_grid.empty())
        throw std::invalid_argument("p and q grids must be non-empty");
    if (cfg.realizations < 1)
        throw std::invalid_argument("realizations must be >= 1");

    static_network g = make_lattice(cfg.rows, cfg.cols);
    node_id center = static_cast<node_id>((cfg.rows / 2) * cfg.cols + cfg.cols / 2);

    std::uint64_t record_index = 0;
    for (double q : cfg.q_grid) {
        for (double p : cfg.p_grid) {
            spreading_params params = spreading_params::make(model_kind::sir, p, q, cfg.steps);
            for (int r = 0; r < cfg.realizations; ++r, ++record_index) {
                if (record_index < skip_records)
                    continue;

                std::uint64_t record_seed = derive_seed(cfg.seed, record_index);
                rng_stream truth_rng(derive_seed(record_seed, 0x74727574ULL));

                sim_outcome truth;
                node_id source = center;
                for (int attempt = 0;; ++attempt) {
                    if (!cfg.central_source)
                        source = static_cast<node_id>(
                            truth_rng.below(static_cast<std::uint64_t>(g.node_count())));
                    truth = simulate_static(g, params, source, truth_rng);
                    if (static_cast<int>(truth.ever.size()) >= cfg.min_snapshot ||
                        attempt >= cfg.max_redraws)
                        break;
                }

                snapshot snap(truth.ever, g.node_count());
                static_backend backend(g, params);

                posterior post;
                std::uint64_t est_seed = derive_seed(record_seed, 0x65737469ULL);
                switch (cfg.estimator) {
                case estimator_kind::direct: {
                    direct_mc_config mc;
                    mc.n = cfg.n;
                    mc.seed = est_seed;
                    mc.jobs = cfg.jobs;
                    post = direct_mc(backend, snap, snap.ever_infected(), mc);
                    break;
                }
                case estimator_kind::soft_margin: {
                    soft_margin_config sm;
                    sm.n = cfg.n;
                    sm.seed = est_seed;
                    sm.jobs = cfg.jobs;
                    post = soft_margin_adaptive(backend, snap, snap.ever_infected(), sm,
                                                cfg.schedule);
                    break;
                }
                case estimator_kind::jordan:
                    post = jordan_center(g, snap);
                    break;
                case estimator_kind::random:
                    post = random_estimator(snap, est_seed);
                    break;
                }

                detectability_record record;
                record.p = p;
                record.q = q;
                record.steps = cfg.steps;
                record.rows = cfg.rows;
                record.cols = cfg.cols;
                record.realization = r;
                record.entropy = post.undefined ? std::numeric_limits<double>::quiet_NaN()
                                                : normalized_entropy(post);
                record.estimator = estimator_name(cfg.estimator);
                record.n = cfg.estimator == estimator_kind::direct ||
                                   cfg.estimator == estimator_kind::soft_margin
                               ? cfg.n
                               : 0;
                record.width = post.width;
                record.converged = !post.undefined && post.converged;
                emit(record);
            }
        }
    }
}

namespace {

drawn_truth draw_truth(const temporal_network& tn, const temporal_experiment_config& cfg,
                       std::uint64_t experiment)
{
    drawn_truth truth;
    rng_stream rng(derive_seed(cfg.seed, experiment, 0x74727574ULL));
    temporal_params params;
    params.p = cfg.p;
    params.q = cfg.q;
    params.t_end = cfg.t_end;

    for (int attempt = 0;; ++attempt) {
        truth.t0 = static_cast<std::int32_t>(rng.uniform_int(cfg.t0_lo, cfg.t0_hi));

        // a source must have a contact soon after t0 or nothing can spread
        std::vector<node_id> eligible;
        {
            std::vector<std::uint8_t> seen(static_cast<std::size_t>(tn.node_count), 0);
            auto it = std::lower_bound(tn.events.begin(), tn.events.end(), truth.t0,
                                       [](const contact_event& e, std::int32_t t) { return e.t < t; });
            for (; it != tn.events.end() && it->t <= truth.t0 + cfg.eligibility_window; ++it) {
                if (!seen[it->u]) {
                    seen[it->u] = 1;
                    eligible.push_back(it->u);
                }
                if (!seen[it->v]) {
                    seen[it->v] = 1;
                    eligible.push_back(it->v);
                }
            }
            std::sort(eligible.begin(), eligible.end());
        }

        if (!eligible.empty()) {
            truth.source = eligible[rng.below(eligible.size())];
            params.t0 = truth.t0;
            sim_outcome outcome = simulate_temporal(tn, params, truth.source, rng);
            truth.ever = std::move(outcome.ever);
            if (static_cast<int>(truth.ever.size()) >= cfg.min_snapshot ||
                attempt >= cfg.max_redraws)
                return truth;
        } else if (attempt >= cfg.max_redraws) {
            throw std::runtime_error("no eligible sources near any drawn t0");
        }
        ++truth.redraws;
    }
}

} // namespace

experiment_report temporal_experiment(const temporal_network& tn,
                                      const temporal_experiment_config& cfg,
                                      const std::function<void(const experiment_row&)>& emit,
                                      std::uint64_t skip_rows,
                                      std::optional<std::vector<experiment_row>> resumed_rows)
{
    if (cfg.experiments < 1)
        throw std::invalid_argument("experiments must be >= 1");
    if (cfg.t0_lo > cfg.t0_hi || cfg.t0_lo < tn.t_min || cfg.t0_hi > cfg.t_end)
        throw std::invalid_argument("t0 window outside the data range");
    if (cfg.epsilon < 0 || cfg.delta < 0)
        throw std::invalid_argument("epsilon and delta must be non-negative");
    if (cfg.estimator != estimator_kind::soft_margin && cfg.estimator != estimator_kind::random)
        throw std::invalid_argument("temporal experiments support soft-margin and random");

    static_network agg = aggregate(tn);

    experiment_report report;
    if (resumed_rows) {
        if (resumed_rows->size() != skip_rows)
            throw std::invalid_argument("resumed rows do not match skip count");
        report.rows = std::move(*resumed_rows);
    }

    for (int e = 0; e < cfg.experiments; ++e) {
        drawn_truth truth = draw_truth(tn, cfg, static_cast<std::uint64_t>(e));
        report.redraws += truth.redraws;
        if (static_cast<std::uint64_t>(e) < skip_rows)
            continue;

        const temporal_network* inference_net = &tn;
        temporal_network randomized;
        if (cfg.delta > 0) {
            randomized = randomize_bins(
                tn, cfg.delta, derive_seed(cfg.seed, static_cast<std::uint64_t>(e), 0x62696eULL));
            inference_net = &randomized;
        }

        snapshot snap(truth.ever, tn.node_count);
        experiment_row row;
        row.experiment = e;
        row.true_source = truth.source;
        row.epsilon = cfg.epsilon;
        row.delta = cfg.delta;

        if (cfg.estimator == estimator_kind::random) {
            row.ml_candidate =
                random_pick(snap, derive_seed(cfg.seed, static_cast<std::uint64_t>(e), 0x7263ULL));
            row.n = 0;
        } else {
            temporal_params params;
            params.p = cfg.p;
            params.q = cfg.q;
            params.t0 = truth.t0;
            params.t_end = cfg.t_end;
            soft_margin_config sm;
            sm.n = cfg.n;
            sm.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(e), 0x65737469ULL);
            sm.jobs = cfg.jobs;
            posterior post = marginalize_t0(*inference_net, params, cfg.epsilon, snap,
                                            snap.ever_infected(), sm, cfg.schedule);
            row.ml_candidate = post.ml_candidate();
            row.n = cfg.n;
        }

        auto dist = bfs_distances(agg, truth.source);
        row.distance = dist[row.ml_candidate];
        report.rows.push_back(row);
        if (emit)
            emit(row);
    }

    std::size_t unreachable = 0;
    std::int32_t max_distance = 0;
    for (const auto& row : report.rows)
        max_distance = std::max(max_distance, row.distance);
    report.fraction_at.assign(static_cast<std::size_t>(max_distance) + 1, 0.0);
    for (const auto& row : report.rows) {
        if (row.distance < 0)
            ++unreachable;
        else
            report.fraction_at[row.distance] += 1.0;
    }
    for (double& f : report.fraction_at)
        f /= static_cast<double>(report.rows.size());
    report.fraction_unreachable = static_cast<double>(unreachable) /
                                  static_cast<double>(report.rows.size());
    return report;
}

} // namespace episource
