#include "nots/bandit.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "nots/errors.hpp"
#include "nots/parallel.hpp"

namespace nots {

Oracle::Oracle(const CandidatePool& pool, NoiseModel noise, FunctionalSpec functional)
    : pool_(&pool), noise_(noise), functional_(std::move(functional)) {
    if (!(noise_.sigma_xi >= 0.0)) throw ValidationError("noise sigma must be nonnegative");
    functional_.validate(pool.grid());
    values_.resize(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) values_[i] = evaluate(pool[i].output, i);
    best_ = *std::max_element(values_.begin(), values_.end());
    worst_ = *std::min_element(values_.begin(), values_.end());
}

double Oracle::evaluate(const ScalarField& u, std::size_t index) const {
    return nots::evaluate(functional_, u, (*pool_)[index].input);
}

ScalarField Oracle::query(std::size_t index, Rng& rng) const {
    if (index >= pool_->size()) throw ValidationError("query index out of range");
    const ScalarField& u = (*pool_)[index].output;
    if (noise_.sigma_xi == 0.0) return u;
    std::vector<double> v(u.values().begin(), u.values().end());
    for (double& x : v) x += noise_.sigma_xi * rng.normal();
    return ScalarField(u.grid(), std::move(v));
}

double default_noise_sigma(const CandidatePool& pool) {
    double s = 0.0, s2 = 0.0, n = 0.0;
    for (const auto& inst : pool.instances())
        for (double v : inst.output.values()) {
            s += v;
            s2 += v * v;
            n += 1.0;
        }
    const double mean = s / n;
    return 0.01 * std::sqrt(std::max(0.0, s2 / n - mean * mean));
}

std::string algorithm_name(AlgorithmKind k) {
    switch (k) {
        case AlgorithmKind::NotsFno: return "nots-fno";
        case AlgorithmKind::Snots: return "snots";
        case AlgorithmKind::StoNts: return "sto-nts";
        case AlgorithmKind::GpTs: return "gp-ts";
        case AlgorithmKind::BoLogEi: return "bo-logei";
        case AlgorithmKind::Bfo: return "bfo";
        case AlgorithmKind::RandomSearch: return "rs";
    }
    return "?";
}

AlgorithmKind algorithm_from_name(const std::string& name) {
    for (auto k : {AlgorithmKind::NotsFno, AlgorithmKind::Snots, AlgorithmKind::StoNts, AlgorithmKind::GpTs,
                   AlgorithmKind::BoLogEi, AlgorithmKind::Bfo, AlgorithmKind::RandomSearch})
        if (algorithm_name(k) == name) return k;
    throw ValidationError("unknown algorithm: " + name);
}

bool is_nots(AlgorithmKind k) { return k == AlgorithmKind::NotsFno || k == AlgorithmKind::Snots; }

void AlgorithmConfig::validate() const {
    if (budget < 1) throw ValidationError("budget must be at least 1");
    if (warm_start < 0) throw ValidationError("warm_start must be nonnegative");
    if (lambda < 0.0 || !(lambda_floor > 0.0)) throw ValidationError("invalid lambda");
    if (gp_depth < 1) throw ValidationError("gp_depth must be at least 1");
    if (bfo_lengthscale < 0.0 || !(bfo_base_lengthscale > 0.0)) throw ValidationError("invalid BFO lengthscale");
    gp_kernel.validate();
    if (snots.width < 1) throw ValidationError("snots width must be positive");
    if (mlp.hidden < 1 || mlp.steps < 0) throw ValidationError("invalid MLP settings");
}

std::size_t argmax_lowest(const Eigen::VectorXd& v) {
    if (v.size() == 0) throw ValidationError("argmax of empty vector");
    std::size_t best = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i)
        if (v(i) > v(static_cast<Eigen::Index>(best))) best = static_cast<std::size_t>(i);
    return best;
}

namespace {

using Clock = std::chrono::steady_clock;

struct Standardizer {
    double mean = 0.0, scale = 1.0;
};

Standardizer pool_input_stats(const CandidatePool& pool) {
    double s = 0.0, s2 = 0.0, n = 0.0;
    for (const auto& inst : pool.instances())
        for (double v : inst.input.values()) {
            s += v;
            s2 += v * v;
            n += 1.0;
        }
    Standardizer st;
    st.mean = s / n;
    const double var = s2 / n - st.mean * st.mean;
    st.scale = var > 0.0 ? std::sqrt(var) : 1.0;
    return st;
}

ScalarField standardize(const ScalarField& f, const Standardizer& st) {
    std::vector<double> v(f.values().begin(), f.values().end());
    for (double& x : v) x = (x - st.mean) / st.scale;
    return ScalarField(f.grid(), std::move(v));
}

Standardizer stats_of(const std::vector<double>& v) {
    Standardizer st;
    if (v.empty()) return st;
    st.mean = std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - st.mean) * (x - st.mean);
    const double sd = std::sqrt(ss / double(v.size()));
    st.scale = sd > 0.0 ? sd : 1.0;
    return st;
}

Standardizer output_stats(const std::vector<ScalarField>& outs) {
    std::vector<double> all;
    for (const auto& u : outs) all.insert(all.end(), u.values().begin(), u.values().end());
    return stats_of(all);
}

class Trial {
public:
    Trial(const Oracle& o, const AlgorithmConfig& cfg, Rng& noise) : oracle_(o), noise_(noise) {
        res_.algorithm = algorithm_name(cfg.kind);
        res_.chosen.reserve(static_cast<std::size_t>(cfg.budget));
    }

    void commit(std::size_t idx, Clock::time_point start) {
        if (idx >= oracle_.size()) throw ValidationError("chosen index out of range");
        observed_.push_back(oracle_.query(idx, noise_));
        indices_.push_back(idx);
        const double r = oracle_.best() - oracle_.true_value(idx);
        res_.chosen.push_back(idx);
        res_.instant.push_back(r);
        res_.cumulative.push_back((res_.cumulative.empty() ? 0.0 : res_.cumulative.back()) + r);
        res_.seconds.push_back(std::chrono::duration<double>(Clock::now() - start).count());
    }

    const std::vector<ScalarField>& observed() const { return observed_; }
    const std::vector<std::size_t>& indices() const { return indices_; }
    TrialResult& result() { return res_; }

private:
    const Oracle& oracle_;
    Rng& noise_;
    std::vector<ScalarField> observed_;
    std::vector<std::size_t> indices_;
    TrialResult res_;
};

std::size_t uniform_pick(Rng& rng, std::size_t n) { return rng.index(n); }

template <class Body>
void run_loop(const AlgorithmConfig& cfg, Trial& trial, Rng& rng, std::size_t n, Body&& choose) {
    for (int t = 0; t < cfg.budget; ++t) {
        const auto start = Clock::now();
        std::size_t idx;
        try {
            idx = t < cfg.warm_start ? uniform_pick(rng, n) : choose(t);
        } catch (const std::exception& e) {
            throw std::runtime_error(algorithm_name(cfg.kind) + " failed at iteration " + std::to_string(t + 1) +
                                     ": " + e.what());
        }
        trial.commit(idx, start);
    }
}

}  // namespace

TrialResult run_nots(const Oracle& oracle, const AlgorithmConfig& cfg, Rng& rng, Rng& noise_rng) {
    cfg.validate();
    if (!is_nots(cfg.kind)) throw ValidationError("run_nots needs a NOTS algorithm kind");
    const CandidatePool& pool = oracle.pool();
    const Grid2D& grid = pool.grid();
    const std::size_t n = pool.size();
    const Standardizer in = pool_input_stats(pool);
    std::vector<ScalarField> inputs;
    inputs.reserve(n);
    for (const auto& inst : pool.instances()) inputs.push_back(standardize(inst.input, in));

    std::vector<Eigen::MatrixXd> feats;
    if (cfg.kind == AlgorithmKind::Snots) {
        const FeatureMap fm(grid, cfg.snots.features);
        feats.resize(n);
        parallel_for(n, [&](std::size_t i) { feats[i] = fm.features(inputs[i]); });
    }
    const auto npts = static_cast<Eigen::Index>(grid.size());
    const double nu_interior = grid.hx() * grid.hy();

    Trial trial(oracle, cfg, noise_rng);
    Eigen::VectorXd scores(static_cast<Eigen::Index>(n));
    run_loop(cfg, trial, rng, n, [&](int) {
        const auto& obs = trial.observed();
        const auto& idx = trial.indices();
        const Standardizer out = output_stats(obs);
        if (cfg.kind == AlgorithmKind::Snots) {
            SingleLayerNO model = SingleLayerNO::draw(grid, cfg.snots, rng);
            double lambda = cfg.lambda;
            if (lambda == 0.0) {
                const double s = oracle.noise().sigma_xi / out.scale;
                lambda = s * s * (cfg.snots.quadrature_weighted ? nu_interior : 1.0);
            }
            lambda = std::max(lambda, cfg.lambda_floor);
            if (!obs.empty()) {
                const auto rows = npts * static_cast<Eigen::Index>(obs.size());
                Eigen::MatrixXd a(rows, model.width());
                Eigen::VectorXd y(rows), nu(rows);
                for (std::size_t j = 0; j < obs.size(); ++j) {
                    const auto off = static_cast<Eigen::Index>(j) * npts;
                    a.middleRows(off, npts) = model.scaled_activations(feats[idx[j]]);
                    for (Eigen::Index z = 0; z < npts; ++z) {
                        y(off + z) = (obs[j][static_cast<std::size_t>(z)] - out.mean) / out.scale;
                        nu(off + z) =
                            cfg.snots.quadrature_weighted ? grid.weights()[static_cast<std::size_t>(z)] : 1.0;
                    }
                }
                model.set_readout(sample_then_optimize(a, y, nu, lambda, model.readout_init(),
                                                       cfg.snots.perturb_targets, rng));
            }
            parallel_for(n, [&](std::size_t c) {
                const Eigen::VectorXd g = model.predict_features(feats[c]);
                std::vector<double> u(static_cast<std::size_t>(npts));
                for (Eigen::Index z = 0; z < npts; ++z) u[static_cast<std::size_t>(z)] = out.mean + out.scale * g(z);
                scores(static_cast<Eigen::Index>(c)) = oracle.evaluate(ScalarField(grid, std::move(u)), c);
            });
        } else {
            std::vector<FieldObservation> data;
            data.reserve(obs.size());
            for (std::size_t j = 0; j < obs.size(); ++j) data.push_back({inputs[idx[j]], standardize(obs[j], out)});
            const double lambda = cfg.lambda > 0.0 ? cfg.lambda : 1e-4;
            FnoTrainConfig tc = cfg.fno;
            const SmallFNO model = fno_train_sgd(data, grid, tc, lambda, rng);
            parallel_for(n, [&](std::size_t c) {
                const ScalarField g = model.forward(inputs[c]);
                std::vector<double> u(g.values().begin(), g.values().end());
                for (double& v : u) v = out.mean + out.scale * v;
                scores(static_cast<Eigen::Index>(c)) = oracle.evaluate(ScalarField(grid, std::move(u)), c);
            });
        }
        return argmax_lowest(scores);
    });
    return std::move(trial.result());
}

TrialResult run_baseline(const Oracle& oracle, const AlgorithmConfig& cfg, Rng& rng, Rng& noise_rng) {
    cfg.validate();
    if (is_nots(cfg.kind)) throw ValidationError("run_baseline needs a baseline algorithm kind");
    const CandidatePool& pool = oracle.pool();
    const std::size_t n = pool.size();
    const auto npts = static_cast<Eigen::Index>(pool.grid().size());
    Trial trial(oracle, cfg, noise_rng);

    if (cfg.kind == AlgorithmKind::RandomSearch) {
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.index(i)]);
        std::size_t next = 0;
        run_loop(cfg, trial, rng, n, [&](int) { return next < n ? perm[next++] : rng.index(n); });
        return std::move(trial.result());
    }

    const Standardizer in = pool_input_stats(pool);
    // Rows are candidates, columns grid nodes.
    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), npts);
    for (std::size_t i = 0; i < n; ++i)
        for (Eigen::Index z = 0; z < npts; ++z)
            x(static_cast<Eigen::Index>(i), z) = (pool[i].input[static_cast<std::size_t>(z)] - in.mean) / in.scale;

    auto observed_values = [&]() {
        std::vector<double> y;
        for (std::size_t j = 0; j < trial.observed().size(); ++j)
            y.push_back(oracle.evaluate(trial.observed()[j], trial.indices()[j]));
        return y;
    };

    if (cfg.kind == AlgorithmKind::StoNts) {
        const Eigen::MatrixXd xt = x.transpose();
        const double lambda = cfg.lambda > 0.0 ? cfg.lambda : 1e-4;
        run_loop(cfg, trial, rng, n, [&](int) {
            const std::vector<double> yv = observed_values();
            const Standardizer ys = stats_of(yv);
            Eigen::MatrixXd xo(npts, static_cast<Eigen::Index>(yv.size()));
            Eigen::VectorXd yo(static_cast<Eigen::Index>(yv.size()));
            for (std::size_t j = 0; j < yv.size(); ++j) {
                xo.col(static_cast<Eigen::Index>(j)) = xt.col(static_cast<Eigen::Index>(trial.indices()[j]));
                yo(static_cast<Eigen::Index>(j)) = (yv[j] - ys.mean) / ys.scale;
            }
            const ScalarMLP net = mlp_fit_sto(xo, yo, lambda, cfg.mlp, rng);
            return argmax_lowest(net.predict(xt));
        });
        return std::move(trial.result());
    }

    Eigen::MatrixXd gram;
    if (cfg.kind == AlgorithmKind::Bfo) {
        const RkhsEmbedding emb(pool.grid(), cfg.bfo_base_lengthscale);
        Eigen::MatrixXd z(static_cast<Eigen::Index>(n), npts);
        for (std::size_t i = 0; i < n; ++i) z.row(static_cast<Eigen::Index>(i)) = emb.embed(pool[i].input).transpose();
        const double ell = cfg.bfo_lengthscale > 0.0 ? cfg.bfo_lengthscale : median_distance(z);
        gram = bfo_gram(z, ell);
    } else {
        gram = nngp_deep_gram(x, cfg.gp_depth, cfg.gp_kernel);
    }
    const double lambda = cfg.lambda > 0.0 ? cfg.lambda : 1e-4;
    run_loop(cfg, trial, rng, n, [&](int) {
        const std::vector<double> yv = observed_values();
        if (cfg.kind == AlgorithmKind::BoLogEi && yv.empty()) return rng.index(n);
        const Standardizer ys = stats_of(yv);
        std::vector<Observation> obs;
        for (std::size_t j = 0; j < yv.size(); ++j) obs.push_back({trial.indices()[j], (yv[j] - ys.mean) / ys.scale});
        const GPPosterior post = posterior_batch(gram, obs, lambda);
        if (cfg.kind == AlgorithmKind::BoLogEi) {
            double best = -std::numeric_limits<double>::infinity();
            for (const auto& o : obs) best = std::max(best, o.value);
            Eigen::VectorXd acq(static_cast<Eigen::Index>(n));
            for (Eigen::Index i = 0; i < acq.size(); ++i)
                acq(i) = log_ei(post.mean(i), std::max(0.0, post.cov(i, i)), best);
            return argmax_lowest(acq);
        }
        return argmax_lowest(sample_mvn(post, rng));
    });
    return std::move(trial.result());
}

TrialResult run_trial(const Oracle& oracle, const AlgorithmConfig& cfg, std::uint64_t seed, int trial) {
    Rng algo(seed, 16 + static_cast<std::uint64_t>(cfg.kind));
    Rng noise(seed, 1);
    TrialResult r = is_nots(cfg.kind) ? run_nots(oracle, cfg, algo, noise) : run_baseline(oracle, cfg, algo, noise);
    r.trial = trial;
    return r;
}

RegretCurve regret_curves(const std::vector<TrialResult>& trials) {
    if (trials.empty()) throw ValidationError("regret_curves needs at least one trial");
    const std::size_t t_len = trials.front().cumulative.size();
    for (const auto& tr : trials)
        if (tr.cumulative.size() != t_len) throw StructuralError("trials have different lengths");
    RegretCurve c;
    const double m = static_cast<double>(trials.size());
    std::vector<double> vals(trials.size());
    auto moments = [&](double& mean, double& sd) {
        // Sorting first makes the result independent of trial order.
        std::sort(vals.begin(), vals.end());
        double s = 0.0;
        for (double v : vals) s += v;
        mean = s / m;
        std::vector<double> dev(vals.size());
        for (std::size_t i = 0; i < vals.size(); ++i) dev[i] = (vals[i] - mean) * (vals[i] - mean);
        std::sort(dev.begin(), dev.end());
        double ss = 0.0;
        for (double d : dev) ss += d;
        sd = std::sqrt(ss / m);
    };
    for (std::size_t t = 0; t < t_len; ++t) {
        double mean, sd;
        for (std::size_t i = 0; i < trials.size(); ++i) vals[i] = trials[i].cumulative[t];
        moments(mean, sd);
        c.mean_cumulative.push_back(mean);
        c.std_cumulative.push_back(sd);
        for (std::size_t i = 0; i < trials.size(); ++i) vals[i] = trials[i].cumulative[t] / double(t + 1);
        moments(mean, sd);
        c.mean_average.push_back(mean);
        c.std_average.push_back(sd);
    }
    return c;
}

}  // namespace nots
