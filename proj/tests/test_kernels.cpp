#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "nots/darcy.hpp"
#include "nots/errors.hpp"
#include "nots/kernels.hpp"
#include "nots/rng.hpp"
#include "nots/single_layer.hpp"
#include "oracles.hpp"

using namespace nots;
using oracle::kPi;

namespace {

std::vector<double> randvec(Rng& rng, int d, double scale = 1.0) {
    std::vector<double> v(static_cast<std::size_t>(d));
    for (auto& x : v) x = scale * rng.normal();
    return v;
}

ScalarField random_perm(const Grid2D& g, std::uint64_t seed) {
    GRFConfig cfg;
    cfg.grid = g;
    Rng rng(seed);
    return binarize(sample_grf(cfg, rng), 3.0, 12.0).field();
}

double min_eig_ratio(const Eigen::MatrixXd& k) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
    return es.eigenvalues().minCoeff() / k.trace();
}

}  // namespace

TEST_CASE("nngp_relu closed-form cases") {
    const ArcCosParams p{2.0, 0.0};
    const std::vector<double> x{1.0, 2.0, -1.0};
    const double d = 3.0;
    CHECK(nngp_relu(x, x, p) == doctest::Approx(2.0 / d * 6.0 / 2.0).epsilon(1e-14));
    const std::vector<double> u{1.0, 0.0, 0.0}, v{0.0, 3.0, 0.0};
    CHECK(nngp_relu(u, v, p) == doctest::Approx(2.0 / d * 3.0 / (2 * kPi)).epsilon(1e-14));
    // Opposite vectors: theta = pi, zero kernel.
    const std::vector<double> mx{-1.0, -2.0, 1.0};
    CHECK(std::abs(nngp_relu(x, mx, p)) < 1e-15);
    const std::vector<double> zero(3, 0.0);
    CHECK(nngp_relu(zero, x, ArcCosParams{2.0, 0.3}) == 0.3);
    CHECK_THROWS_AS(nngp_relu(x, std::vector<double>{1.0}, p), StructuralError);
    CHECK_THROWS_AS((ArcCosParams{0.0, 0.0}.validate()), ValidationError);
    CHECK_THROWS_AS((ArcCosParams{1.0, -1.0}.validate()), ValidationError);
}

TEST_CASE("nngp_relu matches the Monte Carlo expectation") {
    Rng rng(17);
    for (int pair = 0; pair < 5; ++pair) {
        const auto x = randvec(rng, 8), y = randvec(rng, 8);
        const double mc = oracle::relu_expectation_mc(x, y, 2.0, 100000, 100 + pair);
        CHECK(nngp_relu(x, y) == doctest::Approx(mc).epsilon(0.03));
    }
}

TEST_CASE("nngp_deep") {
    Rng rng(5);
    const ArcCosParams p{1.7, 0.2};
    const auto x = randvec(rng, 6), y = randvec(rng, 6);
    CHECK(nngp_deep(x, y, 1, p) == doctest::Approx(nngp_relu(x, y, p)).epsilon(1e-14));

    // Diagonal follows k <- c_b + c_w k / 2.
    double k = 0.0;
    for (double v : x) k += v * v;
    k /= 6.0;
    for (int depth = 1; depth <= 5; ++depth) {
        k = p.c_b + p.c_w * k / 2.0;
        CHECK(nngp_deep(x, x, depth, p) == doctest::Approx(k).epsilon(1e-13));
    }

    const auto a = randvec(rng, 16), b = randvec(rng, 16);
    const double sim = oracle::deep_relu_network_mc(a, b, 3, 2.0, 0.0, 2048, 300, 77);
    CHECK(nngp_deep(a, b, 3) == doctest::Approx(sim).epsilon(0.05));
    CHECK_THROWS_AS(nngp_deep(a, b, 0), ValidationError);

    KernelDiagnostics diag;
    nngp_deep(a, a, 4, {}, &diag);
    CHECK(diag.clamped == 0);
}

TEST_CASE("nngp_deep_gram agrees with pairwise evaluation") {
    Rng rng(9);
    Eigen::MatrixXd rows(6, 5);
    for (Eigen::Index i = 0; i < rows.size(); ++i) rows.data()[i] = rng.normal();
    const ArcCosParams p{2.0, 0.1};
    const Eigen::MatrixXd g = nngp_deep_gram(rows, 3, p);
    for (Eigen::Index i = 0; i < 6; ++i)
        for (Eigen::Index j = 0; j < 6; ++j) {
            const Eigen::VectorXd ri = rows.row(i), rj = rows.row(j);
            CHECK(g(i, j) == doctest::Approx(nngp_deep(std::span<const double>(ri.data(), 5),
                                                       std::span<const double>(rj.data(), 5), 3, p))
                                 .epsilon(1e-12));
        }
    CHECK(min_eig_ratio(g) >= -1e-8);
}

TEST_CASE("kernel symmetry, Cauchy-Schwarz and rotation invariance") {
    Rng rng(31);
    for (int t = 0; t < 30; ++t) {
        const int d = 2 + static_cast<int>(rng.index(10));
        const auto x = randvec(rng, d), y = randvec(rng, d);
        const ArcCosParams p{0.5 + rng.uniform() * 2, rng.uniform()};
        CHECK(nngp_relu(x, y, p) == nngp_relu(y, x, p));
        CHECK(nngp_deep(x, y, 3, p) == doctest::Approx(nngp_deep(y, x, 3, p)).epsilon(1e-15));
        const double kxy = nngp_relu(x, y, p);
        CHECK(kxy * kxy <= nngp_relu(x, x, p) * nngp_relu(y, y, p) * (1 + 1e-12));
        const double dxy = nngp_deep(x, y, 3, p);
        CHECK(dxy * dxy <= nngp_deep(x, x, 3, p) * nngp_deep(y, y, 3, p) * (1 + 1e-12));

        Eigen::MatrixXd m(d, d);
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
        const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(m).householderQ();
        const Eigen::VectorXd rx = q * Eigen::Map<const Eigen::VectorXd>(x.data(), d);
        const Eigen::VectorXd ry = q * Eigen::Map<const Eigen::VectorXd>(y.data(), d);
        CHECK(nngp_relu(rx, ry, p) == doctest::Approx(kxy).epsilon(1e-12));
    }
}

TEST_CASE("neural operator kernel") {
    const Grid2D g(8, 8);
    const FeatureMap fm(g, FeatureMapConfig{4});
    const auto a = random_perm(g, 1), b = random_perm(g, 2);
    const ArcCosParams p{2.0, 0.0};
    const auto v = fm.feature(a, 10);
    const double d = static_cast<double>(v.size());
    CHECK(neural_op_kernel(a, 10, a, 10, fm, p) == doctest::Approx(2.0 / d * v.squaredNorm() / 2).epsilon(1e-13));
    CHECK(neural_op_kernel(a, 3, b, 40, fm, p) == neural_op_kernel(b, 40, a, 3, fm, p));

    // Gram over 5 candidates x 9 nodes.
    std::vector<ScalarField> cands;
    for (std::uint64_t s = 0; s < 5; ++s) cands.push_back(random_perm(g, 10 + s));
    const std::size_t nodes[9] = {0, 7, 9, 18, 27, 36, 45, 54, 63};
    Eigen::MatrixXd k(45, 45);
    for (int i = 0; i < 45; ++i)
        for (int j = 0; j < 45; ++j)
            k(i, j) = neural_op_kernel(cands[static_cast<std::size_t>(i / 9)], nodes[i % 9],
                                       cands[static_cast<std::size_t>(j / 9)], nodes[j % 9], fm, p);
    CHECK(min_eig_ratio(k) >= -1e-8);
}

TEST_CASE("operator kernel matrix") {
    const Grid2D g(8, 8);
    const FeatureMap fm(g, FeatureMapConfig{4});
    const auto a = random_perm(g, 4), b = random_perm(g, 5);
    const auto m = operator_kernel_matrix(a, b, fm);
    CHECK(m.entries.rows() == 64);
    CHECK(m.entries(3, 17) == doctest::Approx(neural_op_kernel(a, 3, b, 17, fm)).epsilon(1e-12));
    CHECK(m.apply(ScalarField::constant(g, 0.0)).norm() == 0.0);

    // Eigenpair of the weighted operator through its symmetric similarity transform.
    const auto kaa = operator_kernel_matrix(a, a, fm);
    const Eigen::VectorXd s = kaa.weights.cwiseSqrt();
    const Eigen::MatrixXd sym = s.asDiagonal() * kaa.entries * s.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    const Eigen::VectorXd q = es.eigenvectors().col(63);
    const double lam = es.eigenvalues()(63);
    const Eigen::VectorXd u = q.cwiseQuotient(s);
    const ScalarField uf(g, std::vector<double>(u.data(), u.data() + u.size()));
    CHECK((kaa.apply(uf) - lam * u).norm() <= 1e-10 * lam * u.norm());
}

TEST_CASE("operator kernel trace equals expected squared norm of random operators") {
    const Grid2D g(8, 8);
    SingleLayerConfig cfg;
    cfg.width = 64;
    cfg.features = FeatureMapConfig{4};
    const auto a = random_perm(g, 6);
    const auto m = operator_kernel_matrix(a, a, FeatureMap(g, cfg.features));
    const double trace = m.entries.diagonal().dot(m.weights);
    Rng rng(123);
    double acc = 0.0;
    const int draws = 2000;
    for (int i = 0; i < draws; ++i) {
        const auto out = SingleLayerNO::draw(g, cfg, rng).predict(a);
        acc += l2_inner(out, out);
    }
    CHECK(acc / draws == doctest::Approx(trace).epsilon(0.05));
}

TEST_CASE("functional kernel") {
    const Grid2D g(8, 8);
    const FeatureMap fm(g, FeatureMapConfig{4});
    const auto a = random_perm(g, 7), b = random_perm(g, 8);
    const auto pt = FunctionalWeights::point(g, 20);
    CHECK(functional_kernel(a, b, pt, fm) == doctest::Approx(neural_op_kernel(a, 20, b, 20, fm)).epsilon(1e-12));
    CHECK(functional_kernel(a, b, FunctionalWeights{std::vector<double>(64, 0.0)}, fm) == 0.0);
    CHECK(FunctionalWeights::mean(g).apply(ScalarField::constant(g, 2.0)) == doctest::Approx(2.0));
    CHECK_THROWS_AS(functional_kernel(a, b, FunctionalWeights{std::vector<double>(3, 1.0)}, fm), StructuralError);
    CHECK_THROWS_AS(FunctionalWeights::point(g, 64), ValidationError);
}

TEST_CASE("mean-functional kernel matches random-operator covariance") {
    const Grid2D g(8, 8);
    SingleLayerConfig cfg;
    cfg.width = 64;
    cfg.features = FeatureMapConfig{4};
    const FeatureMap fm(g, cfg.features);
    const auto mean = FunctionalWeights::mean(g);
    std::vector<ScalarField> cands;
    for (std::uint64_t s = 0; s < 10; ++s) cands.push_back(random_perm(g, 50 + s));
    Eigen::MatrixXd k(10, 10);
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j) k(i, j) = functional_kernel(cands[i], cands[j], mean, fm);
    CHECK(min_eig_ratio(k) >= -1e-8);

    Rng rng(8);
    const int draws = 4000;
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(10, 10);
    for (int t = 0; t < draws; ++t) {
        const auto net = SingleLayerNO::draw(g, cfg, rng);
        Eigen::VectorXd f(10);
        for (int i = 0; i < 10; ++i) f(i) = mean.apply(net.predict(cands[i]));
        c += f * f.transpose();
    }
    c /= draws;
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j) CHECK(std::abs(c(i, j) - k(i, j)) <= 0.1 * std::sqrt(k(i, i) * k(j, j)));
}

TEST_CASE("RKHS embedding and BFO kernel") {
    const Grid2D g(6, 6);
    const RkhsEmbedding emb(g);
    const auto a = random_perm(g, 1), b = random_perm(g, 2);
    CHECK(bfo_kernel(a, a, 0.7, emb) == 1.0);
    CHECK(bfo_kernel(a, b, 1e12, emb) == doctest::Approx(1.0));
    CHECK(bfo_kernel(a, b, 3.0, emb) == bfo_kernel(b, a, 3.0, emb));
    CHECK_THROWS_AS(bfo_kernel(a, b, 0.0, emb), ValidationError);

    // Oracle: squared-exponential Gram built here, solved with a different factorization.
    Eigen::MatrixXd q(36, 36);
    for (int i = 0; i < 36; ++i)
        for (int j = 0; j < 36; ++j) {
            const double dx = g.x(i % 6) - g.x(j % 6), dy = g.y(i / 6) - g.y(j / 6);
            q(i, j) = std::exp(-(dx * dx + dy * dy) / (2 * 0.2 * 0.2));
        }
    q.diagonal().array() += emb.jitter();
    const auto d = a - b;
    const Eigen::Map<const Eigen::VectorXd> dv(d.values().data(), 36);
    const double ref = dv.dot(q.ldlt().solve(dv));
    CHECK(emb.squared_norm(d) == doctest::Approx(ref).epsilon(1e-6));
    CHECK(bfo_kernel(a, b, 5.0, emb) == doctest::Approx(std::exp(-ref / 50.0)).epsilon(1e-6));
}

TEST_CASE("BFO Gram over pool members is a valid kernel matrix") {
    const Grid2D g(10, 10);
    const RkhsEmbedding emb(g);
    Eigen::MatrixXd z(20, 100);
    for (int i = 0; i < 20; ++i) z.row(i) = emb.embed(random_perm(g, 300 + i)).transpose();
    const double ell = median_distance(z);
    const Eigen::MatrixXd k = bfo_gram(z, ell);
    CHECK((k - k.transpose()).norm() == 0.0);
    CHECK(min_eig_ratio(k) >= -1e-8);
    CHECK(k(2, 5) == doctest::Approx(std::exp(-(z.row(2) - z.row(5)).squaredNorm() / (2 * ell * ell))).epsilon(1e-10));
}

TEST_CASE("median distance") {
    Eigen::MatrixXd rows(3, 1);
    rows << 0.0, 1.0, 3.0;
    CHECK(median_distance(rows) == 2.0);
    CHECK(median_distance(Eigen::MatrixXd::Zero(4, 2)) == 1.0);
}
