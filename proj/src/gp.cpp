#include "nots/gp.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <numbers>

#include "nots/errors.hpp"

namespace nots {

GPPosterior GPPosterior::prior(const Eigen::MatrixXd& k) {
    if (k.rows() != k.cols()) throw StructuralError("Gram matrix must be square");
    return GPPosterior{Eigen::VectorXd::Zero(k.rows()), k, 0};
}

Eigen::MatrixXd jittered_cholesky(const Eigen::MatrixXd& a, double* used_jitter) {
    const double scale = a.rows() > 0 ? a.diagonal().mean() : 0.0;
    Eigen::LLT<Eigen::MatrixXd> llt;
    for (double j : kJitterLadder) {
        Eigen::MatrixXd aj = a;
        aj.diagonal().array() += j * scale;
        llt.compute(aj);
        if (llt.info() == Eigen::Success) {
            if (used_jitter) *used_jitter = j;
            return llt.matrixL();
        }
    }
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(a, Eigen::EigenvaluesOnly).eigenvalues();
    const double lo = ev.minCoeff(), hi = ev.maxCoeff();
    throw NumericalError("Cholesky failed after maximum jitter",
                         lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity());
}

GPPosterior posterior_batch(const Eigen::MatrixXd& k, std::span<const Observation> observed, double lambda) {
    if (k.rows() != k.cols()) throw StructuralError("Gram matrix must be square");
    if (!(lambda > 0.0)) throw ValidationError("lambda must be positive");
    const Eigen::Index n = k.rows();
    const auto m = static_cast<Eigen::Index>(observed.size());
    if (m == 0) return GPPosterior::prior(k);
    Eigen::MatrixXd ks(n, m);
    Eigen::VectorXd y(m);
    for (Eigen::Index j = 0; j < m; ++j) {
        const auto idx = observed[static_cast<std::size_t>(j)].index;
        if (idx >= static_cast<std::size_t>(n)) throw ValidationError("observation index out of range");
        ks.col(j) = k.col(static_cast<Eigen::Index>(idx));
        y(j) = observed[static_cast<std::size_t>(j)].value;
    }
    Eigen::MatrixXd kss(m, m);
    for (Eigen::Index j = 0; j < m; ++j)
        for (Eigen::Index i = 0; i < m; ++i) kss(i, j) = ks(static_cast<Eigen::Index>(observed[i].index), j);
    kss.diagonal().array() += lambda;
    const Eigen::MatrixXd l = jittered_cholesky(kss);
    const auto tri = l.triangularView<Eigen::Lower>();
    const Eigen::MatrixXd v = tri.solve(ks.transpose());  // m x n
    const Eigen::VectorXd w = tri.solve(y);
    GPPosterior p;
    p.mean = v.transpose() * w;
    p.cov = k - v.transpose() * v;
    p.cov = (0.5 * (p.cov + p.cov.transpose())).eval();
    p.conditioned = static_cast<int>(m);
    return p;
}

GPPosterior posterior_recursive_step(const GPPosterior& prev, Observation obs, double lambda) {
    if (!(lambda > 0.0)) throw ValidationError("lambda must be positive");
    if (obs.index >= static_cast<std::size_t>(prev.mean.size())) throw ValidationError("observation index out of range");
    const auto i = static_cast<Eigen::Index>(obs.index);
    const Eigen::VectorXd c = prev.cov.col(i);
    const double denom = c(i) + lambda;
    GPPosterior p;
    p.mean = prev.mean + c * ((obs.value - prev.mean(i)) / denom);
    p.cov = prev.cov - c * c.transpose() / denom;
    p.conditioned = prev.conditioned + 1;
    return p;
}

Eigen::VectorXd sample_mvn(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, Rng& rng) {
    if (cov.rows() != mean.size() || cov.cols() != mean.size()) throw StructuralError("covariance shape mismatch");
    Eigen::VectorXd z(mean.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
    if (mean.size() == 0 || !(cov.diagonal().mean() > 0.0)) return mean;
    const Eigen::MatrixXd l = jittered_cholesky(cov);
    return mean + l.triangularView<Eigen::Lower>() * z;
}

Eigen::VectorXd sample_mvn(const GPPosterior& post, Rng& rng) { return sample_mvn(post.mean, post.cov, rng); }

double log_ei(double mu, double var, double best) {
    if (!(var >= 0.0)) throw ValidationError("variance must be nonnegative");
    const double sigma = std::sqrt(var);
    if (sigma == 0.0) {
        const double d = mu - best;
        return d > 0.0 ? std::log(d) : -std::numeric_limits<double>::infinity();
    }
    const double z = (mu - best) / sigma;
    const double log_phi = -0.5 * z * z - 0.5 * std::log(2.0 * std::numbers::pi);
    if (z >= -6.0) {
        const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
        const double h = std::exp(log_phi) + z * cdf;
        return std::log(sigma) + std::log(h);
    }
    // h(z) / phi(z) = sum_{n>=1} (-1)^{n+1} (2n-1)!! / z^{2n}; stop at the smallest term.
    const double iz2 = 1.0 / (z * z);
    double term = iz2, sum = 0.0;
    for (int n = 1; n < 40; ++n) {
        sum += term;
        const double next = -term * (2 * n + 1) * iz2;
        if (std::abs(next) >= std::abs(term)) break;
        term = next;
    }
    return std::log(sigma) + log_phi + std::log(sum);
}

double max_info_gain_greedy(const Eigen::MatrixXd& k, double lambda, int t) {
    if (!(lambda > 0.0)) throw ValidationError("lambda must be positive");
    if (t < 0 || t > k.rows()) throw ValidationError("T exceeds the candidate count");
    Eigen::MatrixXd cov = k;
    std::vector<bool> used(static_cast<std::size_t>(k.rows()), false);
    double total = 0.0;
    for (int step = 0; step < t; ++step) {
        Eigen::Index best = -1;
        double best_var = -1.0;
        for (Eigen::Index i = 0; i < cov.rows(); ++i)
            if (!used[static_cast<std::size_t>(i)] && cov(i, i) > best_var) {
                best_var = cov(i, i);
                best = i;
            }
        used[static_cast<std::size_t>(best)] = true;
        const double v = std::max(best_var, 0.0);
        total += 0.5 * std::log1p(v / lambda);
        const Eigen::VectorXd c = cov.col(best);
        cov -= c * c.transpose() / (v + lambda);
    }
    return total;
}

double max_info_gain_exhaustive(const Eigen::MatrixXd& k, double lambda, int t) {
    if (!(lambda > 0.0)) throw ValidationError("lambda must be positive");
    const int n = static_cast<int>(k.rows());
    if (t < 0 || t > n) throw ValidationError("T exceeds the candidate count");
    if (n > 24) throw ValidationError("exhaustive information gain limited to 24 candidates");
    if (t == 0) return 0.0;
    double best = -std::numeric_limits<double>::infinity();
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (std::popcount(mask) != t) continue;
        std::vector<Eigen::Index> idx;
        for (int i = 0; i < n; ++i)
            if (mask & (1u << i)) idx.push_back(i);
        Eigen::MatrixXd a(t, t);
        for (int p = 0; p < t; ++p)
            for (int q = 0; q < t; ++q) a(p, q) = k(idx[p], idx[q]) / lambda + (p == q ? 1.0 : 0.0);
        Eigen::LLT<Eigen::MatrixXd> llt(a);
        const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
        best = std::max(best, 0.5 * logdet);
    }
    return best;
}

}  // namespace nots
