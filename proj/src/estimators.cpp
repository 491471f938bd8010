#include "episource/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace episource {

namespace {

// Kahan-compensated sum; the a->0 limit check needs exact match counting.
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

std::vector<node_id> checked_candidates(const snapshot& snap, std::vector<node_id> candidates)
{
    if (snap.ever_infected().empty())
        throw std::invalid_argument("snapshot must contain at least one infected node");
    if (candidates.empty())
        throw std::invalid_argument("candidate set must not be empty");
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    for (node_id c : candidates)
        if (c < 0 || c >= snap.node_count() || !snap.is_infected(c))
            throw std::invalid_argument("candidates must be ever-infected snapshot nodes");
    return candidates;
}

// Runs `n` sims of one candidate across workers; sink(i, outcome, worker) is
// called once per index, concurrently, with disjoint index ranges per worker.
void run_sims(const sim_backend& sim, node_id source, std::uint64_t n, std::uint64_t seed,
              const prune_spec* prune, std::size_t jobs,
              const std::function<void(std::uint64_t, const sim_outcome&, std::size_t)>& sink)
{
    std::size_t workers = jobs ? jobs : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<std::size_t>(workers, n);

    auto work = [&](std::size_t w, std::uint64_t begin, std::uint64_t end) {
        sim_scratch scratch;
        for (std::uint64_t i = begin; i < end; ++i) {
            rng_stream rng(derive_seed(seed, i));
            sim_outcome outcome = sim.run(source, rng, prune, scratch);
            sink(i, outcome, w);
        }
    };
    if (workers <= 1) {
        work(0, 0, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back(work, w, n * w / workers, n * (w + 1) / workers);
    for (auto& t : pool)
        t.join();
}

double total_variation(const std::vector<double>& a, const std::vector<double>& b)
{
    double tv = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        tv += std::abs(a[i] - b[i]);
    return tv / 2.0;
}

std::string format_double(double x)
{
    std::ostringstream out;
    out << std::setprecision(17) << x;
    return out.str();
}

} // namespace

double posterior::prob_of(node_id v) const
{
    auto it = std::lower_bound(candidates.begin(), candidates.end(), v);
    if (it == candidates.end() || *it != v)
        return 0.0;
    return probs[static_cast<std::size_t>(it - candidates.begin())];
}

node_id posterior::ml_candidate() const
{
    if (undefined || candidates.empty())
        return -1;
    std::size_t best = 0;
    for (std::size_t i = 1; i < probs.size(); ++i)
        if (probs[i] > probs[best])
            best = i;
    return candidates[best];
}

posterior posterior_from_scores(std::vector<node_id> candidates, const std::vector<double>& scores)
{
    if (candidates.size() != scores.size())
        throw std::invalid_argument("candidate/score size mismatch");
    posterior post;
    post.candidates = std::move(candidates);
    post.probs.assign(scores.size(), 0.0);

    compensated_sum total;
    for (double s : scores) {
        if (s < 0.0 || !std::isfinite(s))
            throw std::invalid_argument("scores must be finite and non-negative");
        total.add(s);
    }
    if (total.value() <= 0.0) {
        post.undefined = true;
        return post;
    }
    for (std::size_t i = 0; i < scores.size(); ++i)
        post.probs[i] = scores[i] / total.value();

    double best = *std::max_element(post.probs.begin(), post.probs.end());
    for (std::size_t i = 0; i < post.probs.size(); ++i)
        if (post.probs[i] == best)
            post.ml_ties.push_back(post.candidates[i]);
    return post;
}

posterior posterior_from_hits(std::vector<node_id> candidates, std::vector<std::uint64_t> hits)
{
    std::vector<double> scores(hits.begin(), hits.end());
    posterior post = posterior_from_scores(std::move(candidates), scores);
    post.hits = std::move(hits);
    return post;
}

void posterior::save_json(const std::filesystem::path& path, const id_map& ids) const
{
    nlohmann::ordered_json doc;
    auto& cand = doc["candidates"] = nlohmann::ordered_json::array();
    for (node_id c : candidates)
        cand.push_back(ids.original(c));
    auto& pr = doc["probs"] = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < candidates.size(); ++i)
        pr[ids.original(candidates[i])] = probs[i];
    auto& meta = doc["meta"] = nlohmann::ordered_json::object();
    meta["n"] = samples_per_candidate;
    if (std::isnan(width))
        meta["a"] = nullptr;
    else
        meta["a"] = width;
    meta["converged"] = converged;
    if (hits.empty()) {
        meta["hits"] = nullptr;
    } else {
        auto& h = meta["hits"] = nlohmann::ordered_json::object();
        for (std::size_t i = 0; i < candidates.size(); ++i)
            h[ids.original(candidates[i])] = hits[i];
    }
    meta["undefined"] = undefined;
    if (undefined) {
        meta["ml"] = nullptr;
    } else {
        meta["ml"] = ids.original(ml_candidate());
        auto& ties = meta["ml_ties"] = nlohmann::ordered_json::array();
        for (node_id t : ml_ties)
            ties.push_back(ids.original(t));
    }

    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out << doc.dump(2) << "\n";
}

void posterior::save_csv(const std::filesystem::path& path, const id_map& ids) const
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out << "node,probability\n";
    for (std::size_t i = 0; i < candidates.size(); ++i)
        out << ids.original(candidates[i]) << "," << format_double(probs[i]) << "\n";
}

double jaccard(std::span<const node_id> a, std::span<const node_id> b)
{
    std::size_t common = 0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j])
            ++i;
        else if (b[j] < a[i])
            ++j;
        else
            ++common, ++i, ++j;
    }
    std::size_t unions = a.size() + b.size() - common;
    if (unions == 0)
        return 1.0;
    return static_cast<double>(common) / static_cast<double>(unions);
}

double partial_observation_similarity(const snapshot& snap, const sim_outcome& outcome)
{
    if (!snap.has_mask())
        return jaccard(snap.ever_infected(), outcome.ever);
    // snapshot's ever-infected set is inside the mask by construction, so
    // only the outcome needs restricting
    std::size_t restricted = 0;
    std::size_t common = 0;
    for (node_id v : outcome.ever) {
        if (snap.is_observed(v)) {
            ++restricted;
            if (snap.is_infected(v))
                ++common;
        }
    }
    std::size_t unions = snap.ever_infected().size() + restricted - common;
    if (unions == 0)
        return 1.0;
    return static_cast<double>(common) / static_cast<double>(unions);
}

posterior direct_mc(const sim_backend& sim, const snapshot& snap,
                    const std::vector<node_id>& candidates_in, const direct_mc_config& cfg)
{
    auto candidates = checked_candidates(snap, candidates_in);
    if (cfg.n < 1)
        throw std::invalid_argument("n must be >= 1");

    auto forbidden = snap.forbidden_mask();
    prune_spec prune{forbidden.data(), nullptr, 0.0};

    // pruning keeps matching outcomes intact, so a non-pruned outcome matches
    // iff its observed part equals the snapshot's ever-infected set
    auto matches = [&snap](const sim_outcome& outcome) {
        if (outcome.pruned)
            return false;
        if (!snap.has_mask())
            return outcome.ever == snap.ever_infected();
        std::size_t seen = 0;
        for (node_id v : outcome.ever) {
            if (snap.is_observed(v)) {
                if (!snap.is_infected(v))
                    return false;
                ++seen;
            }
        }
        return seen == snap.ever_infected().size();
    };

    std::size_t workers = cfg.jobs ? cfg.jobs : std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::uint64_t> hits(candidates.size(), 0);

    int batches = std::max(1, cfg.batches);
    std::vector<double> last_probs;
    int stable = 0;
    bool converged = false;
    std::uint64_t total_hits = 0;

    for (int b = 0; b < batches; ++b) {
        std::uint64_t begin = cfg.n * static_cast<std::uint64_t>(b) / batches;
        std::uint64_t end = cfg.n * static_cast<std::uint64_t>(b + 1) / batches;
        if (begin == end)
            continue;
        for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
            std::vector<std::uint64_t> worker_hits(workers, 0);
            std::uint64_t cand_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(candidates[ci]));
            // same per-sim streams regardless of batch splitting
            std::size_t nworkers = std::min<std::uint64_t>(workers, end - begin);
            auto work = [&](std::size_t w) {
                sim_scratch scratch;
                std::uint64_t lo = begin + (end - begin) * w / nworkers;
                std::uint64_t hi = begin + (end - begin) * (w + 1) / nworkers;
                for (std::uint64_t i = lo; i < hi; ++i) {
                    rng_stream rng(derive_seed(cand_seed, i));
                    sim_outcome outcome = sim.run(candidates[ci], rng, &prune, scratch);
                    if (matches(outcome))
                        ++worker_hits[w];
                }
            };
            if (nworkers <= 1) {
                work(0);
            } else {
                std::vector<std::thread> pool;
                for (std::size_t w = 0; w < nworkers; ++w)
                    pool.emplace_back(work, w);
                for (auto& t : pool)
                    t.join();
            }
            for (std::uint64_t h : worker_hits)
                hits[ci] += h;
        }

        total_hits = 0;
        for (std::uint64_t h : hits)
            total_hits += h;
        if (total_hits > 0) {
            std::vector<double> probs(hits.size());
            for (std::size_t i = 0; i < hits.size(); ++i)
                probs[i] = static_cast<double>(hits[i]) / static_cast<double>(total_hits);
            if (!last_probs.empty() && total_variation(last_probs, probs) < cfg.tv_tol)
                ++stable;
            else
                stable = 0;
            if (stable >= cfg.stable_checks && total_hits >= cfg.min_hits)
                converged = true;
            last_probs = std::move(probs);
        } else {
            last_probs.clear();
            stable = 0;
        }
    }

    posterior post = posterior_from_hits(std::move(candidates), std::move(hits));
    post.samples_per_candidate = cfg.n;
    post.converged = converged;
    return post;
}

similarity_samples draw_similarity_samples(const sim_backend& sim, const snapshot& snap,
                                           const std::vector<node_id>& candidates_in,
                                           const soft_margin_config& cfg)
{
    auto candidates = checked_candidates(snap, candidates_in);
    if (cfg.n < 1)
        throw std::invalid_argument("n must be >= 1");

    prune_spec prune;
    double x_floor = 0.0;
    // bound cutoff needs the unrestricted Jaccard, so it stays off for
    // partially observed snapshots
    if (cfg.bound_pruning && cfg.bound_width > 0.0 && !snap.has_mask()) {
        x_floor = 1.0 - cfg.bound_width * std::sqrt(std::log(1e12));
        if (x_floor > 0.0) {
            prune.target = &snap;
            prune.x_floor = x_floor;
        }
    }
    const prune_spec* prune_ptr = prune.target ? &prune : nullptr;

    similarity_samples samples;
    samples.candidates = candidates;
    samples.values.assign(candidates.size(), std::vector<double>(cfg.n, 0.0));
    for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
        std::uint64_t cand_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(candidates[ci]));
        auto& values = samples.values[ci];
        run_sims(sim, candidates[ci], cfg.n, cand_seed, prune_ptr, cfg.jobs,
                 [&](std::uint64_t i, const sim_outcome& outcome, std::size_t) {
                     // a cut-off sim can only contribute weight below 1e-12;
                     // x_floor stands in for its unknown similarity
                     values[i] = outcome.pruned ? std::max(0.0, x_floor)
                                                : partial_observation_similarity(snap, outcome);
                 });
    }
    return samples;
}

double soft_margin(std::span<const double> similarities, double a)
{
    if (!(a > 0.0))
        throw std::invalid_argument("width a must be positive");
    if (similarities.empty())
        throw std::invalid_argument("similarity samples must be non-empty");
    compensated_sum sum;
    double inv_a2 = 1.0 / (a * a);
    for (double x : similarities) {
        double d = x - 1.0;
        sum.add(std::exp(-d * d * inv_a2));
    }
    return sum.value() / static_cast<double>(similarities.size());
}

std::vector<double> soft_margin(const similarity_samples& samples, double a)
{
    std::vector<double> likelihoods;
    likelihoods.reserve(samples.values.size());
    for (const auto& values : samples.values)
        likelihoods.push_back(soft_margin(values, a));
    return likelihoods;
}

void width_schedule::validate() const
{
    if (widths.empty())
        throw std::invalid_argument("width grid must be non-empty");
    for (std::size_t i = 0; i < widths.size(); ++i) {
        if (!(widths[i] > 0.0))
            throw std::invalid_argument("widths must be positive");
        if (i > 0 && !(widths[i] < widths[i - 1]))
            throw std::invalid_argument("width grid must be strictly decreasing");
    }
    if (!(tolerance > 0.0))
        throw std::invalid_argument("tolerance must be positive");
    if (min_samples < 1)
        throw std::invalid_argument("min_samples must be >= 1");
}

namespace {

// normalized posterior of one half-sample at width a, or empty when no
// candidate scored
std::vector<double> half_posterior(const similarity_samples& samples, double a, int half)
{
    std::vector<double> probs(samples.candidates.size(), 0.0);
    double total = 0.0;
    for (std::size_t ci = 0; ci < samples.values.size(); ++ci) {
        const auto& values = samples.values[ci];
        std::size_t mid = values.size() / 2;
        std::span<const double> part = half == 0
                                           ? std::span<const double>(values.data(), mid)
                                           : std::span<const double>(values.data() + mid,
                                                                     values.size() - mid);
        probs[ci] = soft_margin(part, a);
        total += probs[ci];
    }
    if (total <= 0.0)
        return {};
    for (double& p : probs)
        p /= total;
    return probs;
}

std::size_t argmax_lowest(const std::vector<double>& probs)
{
    std::size_t best = 0;
    for (std::size_t i = 1; i < probs.size(); ++i)
        if (probs[i] > probs[best])
            best = i;
    return best;
}

} // namespace

width_selection select_width(const similarity_samples& samples, const width_schedule& schedule)
{
    schedule.validate();
    width_selection sel{schedule.widths.front(), false};
    for (double a : schedule.widths) {
        auto first = half_posterior(samples, a, 0);
        auto second = half_posterior(samples, a, 1);
        bool agrees = !first.empty() && !second.empty() &&
                      argmax_lowest(first) == argmax_lowest(second);
        if (agrees) {
            double max_gap = 0.0;
            for (std::size_t i = 0; i < first.size(); ++i)
                max_gap = std::max(max_gap, std::abs(first[i] - second[i]));
            agrees = max_gap <= schedule.tolerance;
        }
        if (!agrees)
            break;
        sel.width = a;
        sel.converged = true;
    }
    return sel;
}

posterior soft_margin_posterior(const similarity_samples& samples, double a)
{
    posterior post = posterior_from_scores(samples.candidates, soft_margin(samples, a));
    post.width = a;
    post.samples_per_candidate = samples.values.empty() ? 0 : samples.values.front().size();
    return post;
}

posterior soft_margin_adaptive(const sim_backend& sim, const snapshot& snap,
                               const std::vector<node_id>& candidates,
                               const soft_margin_config& cfg, const width_schedule& schedule)
{
    schedule.validate();
    if (cfg.n < 2 * schedule.min_samples)
        throw std::invalid_argument("n must be at least twice the schedule's minimum samples");

    soft_margin_config sampling = cfg;
    if (cfg.bound_pruning && cfg.bound_width <= 0.0)
        sampling.bound_width = schedule.widths.front();

    similarity_samples samples = draw_similarity_samples(sim, snap, candidates, sampling);
    width_selection sel = select_width(samples, schedule);
    posterior post = soft_margin_posterior(samples, sel.width);
    post.converged = sel.converged;
    return post;
}

posterior marginalize_t0(const temporal_network& tn, const temporal_params& params,
                         std::int32_t epsilon, const snapshot& snap,
                         const std::vector<node_id>& candidates,
                         const soft_margin_config& cfg, const width_schedule& schedule)
{
    if (epsilon < 0)
        throw std::invalid_argument("epsilon must be non-negative");
    temporal_backend backend(tn, params);
    backend.with_t0_window(params.t0 - epsilon, params.t0 + epsilon);
    return soft_margin_adaptive(backend, snap, candidates, cfg, schedule);
}

posterior marginalize_pq(const static_network& g, const spreading_params& params,
                         const pq_prior& prior, const snapshot& snap,
                         const std::vector<node_id>& candidates,
                         const soft_margin_config& cfg, const width_schedule& schedule)
{
    static_backend backend(g, params);
    backend.with_pq_prior(prior);
    return soft_margin_adaptive(backend, snap, candidates, cfg, schedule);
}

posterior jordan_center(const static_network& g, const snapshot& snap)
{
    auto candidates = checked_candidates(snap, snap.ever_infected());

    std::vector<std::int64_t> ecc(candidates.size(), -1); // -1 marks infinity
    for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
        auto dist = bfs_distances(g, candidates[ci]);
        std::int64_t worst = 0;
        for (node_id v : snap.ever_infected()) {
            if (dist[v] < 0) {
                worst = -1;
                break;
            }
            worst = std::max<std::int64_t>(worst, dist[v]);
        }
        ecc[ci] = worst;
    }

    std::int64_t best = -1;
    for (std::int64_t e : ecc)
        if (e >= 0 && (best < 0 || e < best))
            best = e;

    std::vector<double> scores(candidates.size(), 0.0);
    if (best >= 0)
        for (std::size_t ci = 0; ci < candidates.size(); ++ci)
            scores[ci] = ecc[ci] == best ? 1.0 : 0.0;
    return posterior_from_scores(std::move(candidates), scores);
}

posterior random_estimator(const snapshot& snap, std::uint64_t /*seed*/)
{
    auto candidates = checked_candidates(snap, snap.ever_infected());
    std::vector<double> scores(candidates.size(), 1.0);
    return posterior_from_scores(std::move(candidates), scores);
}

node_id random_pick(const snapshot& snap, std::uint64_t seed)
{
    const auto& candidates = snap.ever_infected();
    if (candidates.empty())
        throw std::invalid_argument("snapshot must contain at least one infected node");
    rng_stream rng(derive_seed(seed, 0x7069636bULL));
    return candidates[rng.below(candidates.size())];
}

} // namespace episource
