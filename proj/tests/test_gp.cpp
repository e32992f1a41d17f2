#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "nots/errors.hpp"
#include "nots/gp.hpp"
#include "nots/rng.hpp"

using namespace nots;

namespace {

Eigen::MatrixXd random_psd(Rng& rng, int n, int rank) {
    Eigen::MatrixXd a(n, rank);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.normal();
    return a * a.transpose() / rank;
}

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

// Importance-sampled E[max(0, X - best)] for X ~ N(mu, sigma^2): proposal
// best + Exp(rate), which concentrates on the region that carries the mass.
double ei_importance(double mu, double sigma, double best, double rate, int draws, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::exponential_distribution<double> ex(rate);
    const double c = 1.0 / (sigma * std::sqrt(2.0 * std::acos(-1.0)));
    double s = 0.0;
    for (int i = 0; i < draws; ++i) {
        const double e = ex(gen);
        const double x = best + e;
        const double p = c * std::exp(-0.5 * (x - mu) * (x - mu) / (sigma * sigma));
        const double q = rate * std::exp(-rate * e);
        s += e * p / q;
    }
    return s / draws;
}

}  // namespace

TEST_CASE("batch posterior basics") {
    Rng rng(1);
    const Eigen::MatrixXd k = random_psd(rng, 6, 6);
    const auto prior = posterior_batch(k, {}, 0.1);
    CHECK(prior.mean.norm() == 0.0);
    CHECK(max_abs(prior.cov - k) == 0.0);

    const Observation o{2, 0.7};
    const auto tight = posterior_batch(k, std::span<const Observation>(&o, 1), 1e-12);
    CHECK(tight.mean(2) == doctest::Approx(0.7).epsilon(1e-6));

    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(5, 5);
    const double lam = 0.25;
    const Observation o2{1, 2.0};
    const auto p = posterior_batch(eye, std::span<const Observation>(&o2, 1), lam);
    CHECK(p.mean(1) == doctest::Approx(2.0 / (1 + lam)).epsilon(1e-14));
    CHECK(p.cov(1, 1) == doctest::Approx(1 - 1 / (1 + lam)).epsilon(1e-14));
    CHECK(p.mean(0) == 0.0);
    CHECK(p.cov(3, 3) == 1.0);
    CHECK(p.conditioned == 1);
    CHECK_THROWS_AS(posterior_batch(eye, std::span<const Observation>(&o2, 1), 0.0), ValidationError);
    const Observation out{9, 1.0};
    CHECK_THROWS_AS(posterior_batch(eye, std::span<const Observation>(&out, 1), 0.1), ValidationError);
}

TEST_CASE("recursive and batch posteriors agree") {
    Rng rng(2);
    for (int rep = 0; rep < 5; ++rep) {
        const Eigen::MatrixXd k = random_psd(rng, 20, 8);
        const double lam = 0.01 + rng.uniform();
        std::vector<Observation> obs;
        auto rec = GPPosterior::prior(k);
        for (int t = 0; t < 10; ++t) {
            const Observation o{rng.index(20), rng.normal()};
            obs.push_back(o);
            const auto next = posterior_recursive_step(rec, o, lam);
            for (int i = 0; i < 20; ++i) CHECK(next.cov(i, i) <= rec.cov(i, i) + 1e-10);
            rec = next;
        }
        const auto batch = posterior_batch(k, obs, lam);
        CHECK(max_abs(rec.mean - batch.mean) <= 1e-8);
        CHECK(max_abs(rec.cov - batch.cov) <= 1e-8);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(batch.cov);
        CHECK(es.eigenvalues().minCoeff() >= -1e-8 * batch.cov.trace());
    }
}

TEST_CASE("recursive conditioning details") {
    Rng rng(3);
    const Eigen::MatrixXd k = random_psd(rng, 4, 4);
    auto p = GPPosterior::prior(k);
    const Observation o{1, 0.5};
    const auto p1 = posterior_recursive_step(p, o, 0.3);
    const auto p2 = posterior_recursive_step(p1, o, 0.3);
    CHECK(p1.cov(1, 1) < p.cov(1, 1));
    CHECK(p2.cov(1, 1) < p1.cov(1, 1));

    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(4, 4);
    block.topLeftCorner(2, 2) << 2.0, 0.5, 0.5, 1.0;
    block.bottomRightCorner(2, 2) << 1.0, 0.2, 0.2, 1.5;
    const Observation o0{0, 3.0};
    const auto pb = posterior_recursive_step(GPPosterior::prior(block), o0, 0.1);
    CHECK(pb.mean(2) == 0.0);
    CHECK(pb.mean(3) == 0.0);
    CHECK(pb.mean(1) != 0.0);
}

TEST_CASE("multivariate normal sampling") {
    Rng rng(4);
    GPPosterior zero;
    zero.mean = Eigen::VectorXd::LinSpaced(3, 1.0, 3.0);
    zero.cov = Eigen::MatrixXd::Zero(3, 3);
    CHECK(sample_mvn(zero, rng) == zero.mean);

    const Eigen::MatrixXd k = random_psd(rng, 5, 5);
    const Eigen::VectorXd mu = Eigen::VectorXd::LinSpaced(5, -1.0, 1.0);
    const int n = 10000;
    Eigen::VectorXd m = Eigen::VectorXd::Zero(5);
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(5, 5);
    std::vector<Eigen::VectorXd> xs;
    for (int i = 0; i < n; ++i) {
        xs.push_back(sample_mvn(mu, k, rng));
        m += xs.back();
    }
    m /= n;
    for (const auto& x : xs) c += (x - m) * (x - m).transpose();
    c /= n - 1;
    for (int i = 0; i < 5; ++i) CHECK(std::abs(m(i) - mu(i)) <= 3 * std::sqrt(k(i, i) / n));
    CHECK((c - k).norm() <= 0.1 * k.norm());

    Rng a(9), b(9);
    CHECK(sample_mvn(mu, k, a) == sample_mvn(mu, k, b));
}

TEST_CASE("jittered Cholesky") {
    Eigen::MatrixXd k = Eigen::MatrixXd::Ones(4, 4);  // rank one
    double used = -1;
    const Eigen::MatrixXd l = jittered_cholesky(k, &used);
    CHECK(used >= 0.0);
    CHECK((l * l.transpose() - k).norm() <= 1e-5);
    Eigen::MatrixXd neg = -Eigen::MatrixXd::Identity(3, 3);
    CHECK_THROWS_AS(jittered_cholesky(neg), NumericalError);
}

TEST_CASE("log expected improvement") {
    CHECK(log_ei(0.0, 1.0, 0.0) == doctest::Approx(-0.5 * std::log(2 * std::acos(-1.0))).epsilon(1e-12));
    CHECK(log_ei(2.5, 0.0, 1.0) == doctest::Approx(std::log(1.5)).epsilon(1e-14));
    CHECK(log_ei(2.5, 1e-30, 1.0) == doctest::Approx(std::log(1.5)).epsilon(1e-10));
    CHECK(log_ei(0.5, 0.0, 1.0) == -std::numeric_limits<double>::infinity());

    // Tail branch against an importance-sampling oracle.
    for (double z : {-5.0, -6.5, -8.0, -12.0}) {
        const double mc = ei_importance(z, 1.0, 0.0, -z, 1000000, 5);
        CAPTURE(z);
        CHECK(std::abs(log_ei(z, 1.0, 0.0) - std::log(mc)) <= 0.05);
    }
    // Continuity across the branch switch.
    CHECK(log_ei(-6.0 + 1e-9, 1.0, 0.0) == doctest::Approx(log_ei(-6.0 - 1e-9, 1.0, 0.0)).epsilon(1e-6));
    // Scale: EI(mu, s^2, b) = s EI((mu - b)/s, 1, 0).
    CHECK(log_ei(-3.0, 4.0, 5.0) == doctest::Approx(std::log(2.0) + log_ei(-4.0, 1.0, 0.0)).epsilon(1e-12));
    // Monotone in mu.
    double prev = -std::numeric_limits<double>::infinity();
    for (double mu = -40; mu <= 5; mu += 0.25) {
        const double v = log_ei(mu, 1.0, 0.0);
        CHECK(std::isfinite(v));
        CHECK(v > prev);
        prev = v;
    }
}

TEST_CASE("maximum information gain") {
    const double lam = 0.3;
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(7, 7);
    for (int t = 0; t <= 7; ++t) {
        CHECK(max_info_gain_greedy(eye, lam, t) == doctest::Approx(0.5 * t * std::log(1 + 1 / lam)).epsilon(1e-12));
        CHECK(max_info_gain_exhaustive(eye, lam, t) ==
              doctest::Approx(0.5 * t * std::log(1 + 1 / lam)).epsilon(1e-12));
    }
    CHECK(max_info_gain_greedy(eye, lam, 0) == 0.0);
    CHECK_THROWS_AS(max_info_gain_greedy(eye, lam, 8), ValidationError);

    Rng rng(6);
    const double bound = 1.0 - std::exp(-1.0);
    for (int rep = 0; rep < 20; ++rep) {
        const Eigen::MatrixXd k = random_psd(rng, 8, 3);
        const double g = max_info_gain_greedy(k, 0.1, 3);
        const double e = max_info_gain_exhaustive(k, 0.1, 3);
        CHECK(g >= bound * e);
        CHECK(g <= e + 1e-12);
    }

    // Nondecreasing with shrinking increments.
    const Eigen::MatrixXd k = random_psd(rng, 12, 5);
    std::vector<double> gam;
    for (int t = 0; t <= 8; ++t) gam.push_back(max_info_gain_greedy(k, 0.05, t));
    for (int t = 1; t <= 8; ++t) CHECK(gam[t] >= gam[t - 1]);
    for (int t = 2; t <= 8; ++t) CHECK(gam[t] - gam[t - 1] <= gam[t - 1] - gam[t - 2] + 1e-12);
}
