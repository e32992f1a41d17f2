#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "nots/darcy.hpp"
#include "nots/errors.hpp"
#include "nots/pool.hpp"
#include "oracles.hpp"

using namespace nots;
using oracle::kPi;

namespace {

PermeabilityField random_binary(const Grid2D& g, std::uint64_t seed) {
    GRFConfig cfg;
    cfg.grid = g;
    Rng rng(seed);
    return binarize(sample_grf(cfg, rng), 3.0, 12.0);
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("nots_test_" + name)).string();
}

}  // namespace

TEST_CASE("GRF sampling is deterministic per seed") {
    GRFConfig cfg;
    Rng a(5), b(5), c(6);
    const auto fa = sample_grf(cfg, a), fb = sample_grf(cfg, b), fc = sample_grf(cfg, c);
    CHECK(fa == fb);
    CHECK_FALSE(fa == fc);
    GRFConfig bad;
    bad.tau = 0.0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("GRF pointwise variance matches the spectral sum") {
    GRFConfig cfg;
    cfg.grid = Grid2D(16, 16);
    // Oracle: every retained frequency other than zero, |mx|, |my| <= 7.
    double expected = 0.0;
    for (int mx = -7; mx <= 7; ++mx)
        for (int my = -7; my <= 7; ++my) {
            if (mx == 0 && my == 0) continue;
            expected += std::pow(4 * kPi * kPi * (mx * mx + my * my) + cfg.tau * cfg.tau, -cfg.alpha);
        }
    Rng rng(99);
    const std::size_t node = cfg.grid.index(5, 9);
    double s2 = 0.0, pooled = 0.0;
    const int draws = 500;
    for (int d = 0; d < draws; ++d) {
        const auto f = sample_grf(cfg, rng);
        s2 += f[node] * f[node];
        for (double v : f.values()) pooled += v * v;
    }
    CHECK(s2 / draws == doctest::Approx(expected).epsilon(0.10));
    CHECK(pooled / (draws * 256.0) == doctest::Approx(expected).epsilon(0.03));
}

TEST_CASE("GRF with large tau is nearly white") {
    GRFConfig cfg;
    cfg.tau = 100.0;
    Rng rng(4);
    double num = 0.0, den = 0.0;
    for (int d = 0; d < 100; ++d) {
        const auto f = sample_grf(cfg, rng);
        for (int iy = 0; iy < 16; ++iy)
            for (int ix = 0; ix + 1 < 16; ++ix) {
                num += f(ix, iy) * f(ix + 1, iy);
                den += f(ix, iy) * f(ix, iy);
            }
    }
    CHECK(num / den <= 0.2);
}

TEST_CASE("binarize") {
    Grid2D g(8, 8);
    const auto hi = binarize(ScalarField::constant(g, 1.0), 3.0, 12.0);
    const auto lo = binarize(ScalarField::constant(g, -1.0), 3.0, 12.0);
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(hi.field()[i] == 12.0);
        CHECK(lo.field()[i] == 3.0);
    }
    CHECK(binarize(ScalarField::constant(g, 0.0), 3.0, 12.0).field()[0] == 12.0);
    CHECK_THROWS_AS(binarize(ScalarField::constant(g, 1.0), 0.0, 12.0), ValidationError);
    CHECK_THROWS_AS(PermeabilityField(ScalarField::constant(g, 5.0), 3.0, 12.0), ValidationError);

    GRFConfig cfg;
    Rng rng(12);
    std::size_t high = 0, total = 0;
    while (total < 10000) {
        const auto a = binarize(sample_grf(cfg, rng), 3.0, 12.0);
        for (double v : a.field().values()) high += v == 12.0;
        total += cfg.grid.size();
    }
    CHECK(static_cast<double>(high) / total == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("Darcy with unit permeability matches the series solution") {
    Grid2D g(65, 65);
    const auto u = solve_darcy(ScalarField::constant(g, 1.0), 1.0);
    const double oracle = oracle::poisson_series(0.5, 0.5);
    CHECK(oracle == doctest::Approx(0.0737).epsilon(0.002));
    CHECK(u(32, 32) == doctest::Approx(oracle).epsilon(0.01));
}

TEST_CASE("Darcy solution keeps reflection symmetry") {
    Grid2D g(17, 17);
    const auto base = random_binary(g, 3).field();
    std::vector<double> v(g.size());
    for (int iy = 0; iy < 17; ++iy)
        for (int ix = 0; ix < 17; ++ix) v[g.index(ix, iy)] = base(std::min(ix, 16 - ix), iy);
    const auto u = solve_darcy(ScalarField(g, v), 1.0);
    double worst = 0.0;
    for (int iy = 0; iy < 17; ++iy)
        for (int ix = 0; ix < 17; ++ix) worst = std::max(worst, std::abs(u(ix, iy) - u(16 - ix, iy)));
    CHECK(worst <= 1e-10);
}

TEST_CASE("Darcy conservation and maximum principle on binary permeabilities") {
    for (int n : {16, 64}) {
        const double tol = n == 16 ? 0.05 : 0.01;
        Grid2D g(n, n);
        double worst = 0.0;
        for (std::uint64_t s = 0; s < 50; ++s) {
            const auto a = random_binary(g, 1000 + s);
            const auto u = solve_darcy(a, 1.0);
            worst = std::max(worst, std::abs(boundary_outflow(u, a.field(), 1.0) - 1.0));
            double umin = 0.0;
            for (double x : u.values()) umin = std::min(umin, x);
            CHECK(umin >= 0.0);
            for (int i = 0; i < n; ++i) {
                CHECK(u(i, 0) == 0.0);
                CHECK(u(i, n - 1) == 0.0);
                CHECK(u(0, i) == 0.0);
                CHECK(u(n - 1, i) == 0.0);
            }
        }
        CAPTURE(n);
        CHECK(worst <= tol);
    }
}

TEST_CASE("Darcy outflow scales with forcing") {
    Grid2D g(16, 16);
    const auto a = random_binary(g, 8);
    const auto u1 = solve_darcy(a, 1.0), u3 = solve_darcy(a, 3.0);
    CHECK(boundary_outflow(u3, a.field(), 3.0) == doctest::Approx(3.0 * boundary_outflow(u1, a.field(), 1.0)).epsilon(1e-8));
}

TEST_CASE("Darcy grid convergence is at least order 1.5") {
    auto coef = [](double x, double y) { return 2.0 + std::sin(kPi * x) * std::cos(2 * kPi * y); };
    const Grid2D fine(129, 129);
    const auto ref = solve_darcy(ScalarField::from_function(fine, coef), 1.0);
    std::vector<double> err;
    for (int n : {17, 33, 65}) {
        const Grid2D g(n, n);
        const auto u = solve_darcy(ScalarField::from_function(g, coef), 1.0);
        const int stride = 128 / (n - 1);
        double e = 0.0;
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix) e = std::max(e, std::abs(u(ix, iy) - ref(ix * stride, iy * stride)));
        err.push_back(e);
    }
    CHECK(err[1] < err[0]);
    CHECK(err[2] < err[1]);
    CHECK(std::log2(err[0] / err[1]) >= 1.5);
    CHECK(std::log2(err[1] / err[2]) >= 1.5);
}

TEST_CASE("Darcy solver failures") {
    CHECK_THROWS_AS(solve_darcy(ScalarField::constant(Grid2D(2, 5), 1.0), 1.0), StructuralError);
    std::vector<double> v(16, 1.0);
    v[5] = -1.0;
    CHECK_THROWS_AS(solve_darcy(ScalarField(Grid2D(4, 4), v), 1.0), ValidationError);
    DarcyOptions opts;
    opts.max_iterations = 2;
    try {
        solve_darcy(random_binary(Grid2D(24, 24), 1), 1.0, opts);
        FAIL("expected SolverError");
    } catch (const SolverError& e) {
        CHECK(e.residual() > 1e-10);
        CHECK(e.iterations() == 2);
    }
}

TEST_CASE("pool generation") {
    GRFConfig cfg;
    const auto p = generate_pool(6, cfg, 3.0, 12.0, 1.0, 42);
    CHECK(p.size() == 6);
    CHECK(p == generate_pool(6, cfg, 3.0, 12.0, 1.0, 42, 3));
    CHECK_FALSE(p == generate_pool(6, cfg, 3.0, 12.0, 1.0, 43));
    const auto inst = generate_instance(cfg, 3.0, 12.0, 1.0, 42, 4);
    CHECK(inst.a.field() == p[4].input);
    CHECK(inst.u == p[4].output);
    CHECK(generate_pool(1, cfg, 3.0, 12.0, 1.0, 42).size() == 1);
    CHECK_THROWS_AS(generate_pool(0, cfg, 3.0, 12.0, 1.0, 42), ValidationError);
    CHECK(p.metadata().generator == "darcy");
    CHECK(p.metadata().seed == 42);
    // Every generated instance conserves mass at the 16 x 16 tolerance.
    for (const auto& i : p.instances()) CHECK(boundary_outflow(i.output, i.input, 1.0) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("pool file round trip, size arithmetic and digest") {
    GRFConfig cfg;
    const std::size_t n = 1000;
    const auto p = generate_pool(n, cfg, 3.0, 12.0, 1.0, 2024);
    const std::string path = temp_path("pool.bin");
    write_pool(p, path);
    CHECK(read_pool(path) == p);

    const std::string bytes = serialize_pool(p);
    CHECK(bytes.substr(0, 8) == "NOBENCH1");
    const std::size_t payload = 2 * n * 16 * 16 * 8;
    std::uint64_t json_len = 0;
    std::memcpy(&json_len, bytes.data() + kPoolHeaderBytes + payload + 8 * n, 8);
    CHECK(std::filesystem::file_size(path) == kPoolHeaderBytes + payload + 8 * n + 8 + json_len);
    std::filesystem::remove(path);

    // Frozen at build time; any change to the generator or the format moves it.
    CHECK(hex_digest(pool_digest(p)) == "e9a4c28bbcf80c31");
}

TEST_CASE("corrupted or truncated pool files are rejected") {
    GRFConfig cfg;
    const auto p = generate_pool(3, cfg, 3.0, 12.0, 1.0, 1);
    const std::string bytes = serialize_pool(p);
    CHECK(parse_pool(bytes) == p);

    std::string bad = bytes;
    bad[2] = 'X';
    try {
        parse_pool(bad);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(e.offset() == 0);
    }
    bad = bytes;
    bad[7] = '2';
    CHECK_THROWS_AS(parse_pool(bad), FormatError);
    bad = bytes;
    bad[20] = 0x7f;  // unknown flag bits
    CHECK_THROWS_AS(parse_pool(bad), FormatError);
    CHECK_THROWS_AS(parse_pool(bytes.substr(0, bytes.size() / 2)), FormatError);
    CHECK_THROWS_AS(parse_pool(bytes.substr(0, 10)), FormatError);
    CHECK_THROWS_AS(parse_pool(bytes + "x"), FormatError);
    CHECK_THROWS_AS(read_pool(temp_path("does_not_exist.bin")), std::runtime_error);
}
