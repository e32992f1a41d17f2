#include "nots/fno.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "nots/errors.hpp"

namespace nots {

namespace {

using MapM = Eigen::Map<Eigen::MatrixXd>;
using CMapM = Eigen::Map<const Eigen::MatrixXd>;
using CMapV = Eigen::Map<const Eigen::VectorXd>;

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2)); }

double gelu_grad(double x) {
    const double cdf = 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2));
    const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
    return cdf + x * pdf;
}

}  // namespace

SpectralBasis::SpectralBasis(const Grid2D& grid, int modes) {
    if (modes < 1) throw ValidationError("modes must be positive");
    if (2 * modes > grid.nx() || 2 * modes > grid.ny()) throw ValidationError("modes exceed half the grid size");
    for (int y = 0; y < modes; ++y)
        for (int x = (y == 0 ? 0 : -(modes - 1)); x < modes; ++x) {
            kx.push_back(x);
            ky.push_back(y);
        }
    const auto n = static_cast<Eigen::Index>(grid.size());
    const auto k = static_cast<Eigen::Index>(kx.size());
    analysis_re.resize(n, k);
    analysis_im.resize(n, k);
    synthesis_re.resize(k, n);
    synthesis_im.resize(k, n);
    const double two_pi = 2.0 * std::numbers::pi;
    for (Eigen::Index m = 0; m < k; ++m) {
        const double c = m == 0 ? 1.0 : 2.0;
        for (int iy = 0; iy < grid.ny(); ++iy)
            for (int ix = 0; ix < grid.nx(); ++ix) {
                const double t = two_pi * (double(kx[m]) * ix / grid.nx() + double(ky[m]) * iy / grid.ny());
                const auto z = static_cast<Eigen::Index>(grid.index(ix, iy));
                const double cs = std::cos(t), sn = std::sin(t);
                analysis_re(z, m) = cs / n;
                analysis_im(z, m) = -sn / n;
                synthesis_re(m, z) = c * cs;
                synthesis_im(m, z) = -c * sn;
            }
    }
}

struct SmallFNO::Tape {
    Eigen::MatrixXd input;
    std::vector<Eigen::MatrixXd> h;  // h[l] feeds layer l; h[layers] feeds the projection
    std::vector<Eigen::MatrixXd> xr, xi, z;
};

SmallFNO::SmallFNO(const Grid2D& grid, const FnoConfig& cfg) : grid_(grid), cfg_(cfg) {
    if (cfg.layers < 1 || cfg.channels < 1) throw ValidationError("FNO needs at least one layer and channel");
    basis_ = std::make_shared<SpectralBasis>(grid, cfg.modes);
    const Eigen::Index c = cfg.channels, k = basis_->count();
    Eigen::Index off = 0;
    auto add = [&](std::string name, Eigen::Index size) {
        layout_.push_back({std::move(name), off, size});
        off += size;
    };
    add("lift.weight", c * input_channels());
    add("lift.bias", c);
    for (int l = 0; l < cfg.layers; ++l) {
        const std::string p = "layer" + std::to_string(l);
        add(p + ".spectral_re", k * c * c);
        add(p + ".spectral_im", (k - 1) * c * c);
        add(p + ".residual.weight", c * c);
        add(p + ".residual.bias", c);
    }
    add("project.weight", c);
    add("project.bias", 1);
    theta_ = Eigen::VectorXd::Zero(off);
}

SmallFNO SmallFNO::zeros(const Grid2D& grid, const FnoConfig& cfg) { return SmallFNO(grid, cfg); }

SmallFNO SmallFNO::initialize(const Grid2D& grid, const FnoConfig& cfg, Rng& rng) {
    SmallFNO m(grid, cfg);
    const double c = cfg.channels;
    for (const auto& b : m.layout_) {
        double sd = 0.0;
        if (b.name == "lift.weight") sd = std::sqrt(2.0 / m.input_channels());
        else if (b.name.ends_with("spectral_re") || b.name.ends_with("spectral_im")) sd = std::sqrt(0.5 / c);
        else if (b.name.ends_with("residual.weight")) sd = std::sqrt(1.0 / c);
        else if (b.name == "project.weight") sd = std::sqrt(1.0 / c);
        if (sd == 0.0) continue;  // biases start at zero
        for (Eigen::Index i = 0; i < b.size; ++i) m.theta_(b.offset + i) = sd * rng.normal();
    }
    return m;
}

const ParamBlock& SmallFNO::block(const std::string& name) const {
    for (const auto& b : layout_)
        if (b.name == name) return b;
    throw ValidationError("no parameter block " + name);
}

void SmallFNO::set_theta(Eigen::VectorXd t) {
    if (t.size() != theta_.size()) throw StructuralError("parameter vector length mismatch");
    theta_ = std::move(t);
}

Eigen::MatrixXd SmallFNO::input_matrix(const ScalarField& a) const {
    if (!(a.grid() == grid_)) throw StructuralError("FNO input grid mismatch");
    const auto n = static_cast<Eigen::Index>(grid_.size());
    Eigen::MatrixXd x(input_channels(), n);
    x.row(0) = CMapV(a.values().data(), n).transpose();
    if (cfg_.coordinates)
        for (int iy = 0; iy < grid_.ny(); ++iy)
            for (int ix = 0; ix < grid_.nx(); ++ix) {
                const auto z = static_cast<Eigen::Index>(grid_.index(ix, iy));
                x(1, z) = double(ix) / (grid_.nx() - 1);
                x(2, z) = double(iy) / (grid_.ny() - 1);
            }
    return x;
}

Eigen::RowVectorXd SmallFNO::run(const ScalarField& a, Tape* tape) const {
    const Eigen::Index c = cfg_.channels, k = basis_->count();
    const double* p = theta_.data();
    auto blk = [&](int i) { return layout_[static_cast<std::size_t>(i)]; };
    Eigen::MatrixXd x = input_matrix(a);
    const auto cin = x.rows();
    Eigen::MatrixXd h = CMapM(p + blk(0).offset, c, cin) * x;
    h.colwise() += CMapV(p + blk(1).offset, c);
    if (tape) {
        tape->input = x;
        tape->h.assign(1, h);
        tape->xr.clear();
        tape->xi.clear();
        tape->z.clear();
    }
    for (int l = 0; l < cfg_.layers; ++l) {
        const int base = 2 + 4 * l;
        const double* rr = p + blk(base).offset;
        const double* ri = p + blk(base + 1).offset;
        Eigen::MatrixXd xr = h * basis_->analysis_re;
        Eigen::MatrixXd xi = h * basis_->analysis_im;
        Eigen::MatrixXd yr(c, k), yi(c, k);
        for (Eigen::Index m = 0; m < k; ++m) {
            CMapM wr(rr + m * c * c, c, c);
            if (m == 0) {
                yr.col(m) = wr * xr.col(m);
                yi.col(m) = wr * xi.col(m);
            } else {
                CMapM wi(ri + (m - 1) * c * c, c, c);
                yr.col(m) = wr * xr.col(m) - wi * xi.col(m);
                yi.col(m) = wr * xi.col(m) + wi * xr.col(m);
            }
        }
        Eigen::MatrixXd z = yr * basis_->synthesis_re + yi * basis_->synthesis_im;
        z.noalias() += CMapM(p + blk(base + 2).offset, c, c) * h;
        z.colwise() += CMapV(p + blk(base + 3).offset, c);
        Eigen::MatrixXd hn = cfg_.activation == Activation::Gelu ? z.unaryExpr(&gelu).eval() : z;
        if (tape) {
            tape->xr.push_back(std::move(xr));
            tape->xi.push_back(std::move(xi));
            tape->z.push_back(std::move(z));
            tape->h.push_back(hn);
        }
        h = std::move(hn);
    }
    const auto& pw = blk(2 + 4 * cfg_.layers);
    const auto& pb = blk(3 + 4 * cfg_.layers);
    Eigen::RowVectorXd out = CMapV(p + pw.offset, c).transpose() * h;
    out.array() += p[pb.offset];
    return out;
}

void SmallFNO::backward(const Tape& t, const Eigen::RowVectorXd& dout, Eigen::VectorXd& grad) const {
    const Eigen::Index c = cfg_.channels, k = basis_->count();
    const double* p = theta_.data();
    double* g = grad.data();
    auto blk = [&](int i) { return layout_[static_cast<std::size_t>(i)]; };
    const auto& pw = blk(2 + 4 * cfg_.layers);
    const auto& pb = blk(3 + 4 * cfg_.layers);
    Eigen::Map<Eigen::VectorXd>(g + pw.offset, c) += t.h.back() * dout.transpose();
    g[pb.offset] += dout.sum();
    Eigen::MatrixXd dh = CMapV(p + pw.offset, c) * dout;
    for (int l = cfg_.layers - 1; l >= 0; --l) {
        const int base = 2 + 4 * l;
        const Eigen::MatrixXd& z = t.z[static_cast<std::size_t>(l)];
        const Eigen::MatrixXd& hin = t.h[static_cast<std::size_t>(l)];
        const Eigen::MatrixXd& xr = t.xr[static_cast<std::size_t>(l)];
        const Eigen::MatrixXd& xi = t.xi[static_cast<std::size_t>(l)];
        Eigen::MatrixXd dz = cfg_.activation == Activation::Gelu ? dh.cwiseProduct(z.unaryExpr(&gelu_grad)).eval() : dh;
        MapM(g + blk(base + 2).offset, c, c).noalias() += dz * hin.transpose();
        Eigen::Map<Eigen::VectorXd>(g + blk(base + 3).offset, c) += dz.rowwise().sum();
        Eigen::MatrixXd dprev = CMapM(p + blk(base + 2).offset, c, c).transpose() * dz;
        const Eigen::MatrixXd dyr = dz * basis_->synthesis_re.transpose();
        const Eigen::MatrixXd dyi = dz * basis_->synthesis_im.transpose();
        Eigen::MatrixXd dxr(c, k), dxi(c, k);
        const double* rr = p + blk(base).offset;
        const double* ri = p + blk(base + 1).offset;
        double* grr = g + blk(base).offset;
        double* gri = g + blk(base + 1).offset;
        for (Eigen::Index m = 0; m < k; ++m) {
            CMapM wr(rr + m * c * c, c, c);
            MapM(grr + m * c * c, c, c).noalias() +=
                dyr.col(m) * xr.col(m).transpose() + dyi.col(m) * xi.col(m).transpose();
            if (m == 0) {
                dxr.col(m) = wr.transpose() * dyr.col(m);
                dxi.col(m) = wr.transpose() * dyi.col(m);
            } else {
                CMapM wi(ri + (m - 1) * c * c, c, c);
                MapM(gri + (m - 1) * c * c, c, c).noalias() +=
                    dyi.col(m) * xr.col(m).transpose() - dyr.col(m) * xi.col(m).transpose();
                dxr.col(m) = wr.transpose() * dyr.col(m) + wi.transpose() * dyi.col(m);
                dxi.col(m) = wr.transpose() * dyi.col(m) - wi.transpose() * dyr.col(m);
            }
        }
        dprev.noalias() += dxr * basis_->analysis_re.transpose();
        dprev.noalias() += dxi * basis_->analysis_im.transpose();
        dh = std::move(dprev);
    }
    MapM(g + blk(0).offset, c, t.input.rows()).noalias() += dh * t.input.transpose();
    Eigen::Map<Eigen::VectorXd>(g + blk(1).offset, c) += dh.rowwise().sum();
}

ScalarField SmallFNO::forward(const ScalarField& a) const {
    const Eigen::RowVectorXd y = run(a, nullptr);
    return ScalarField(grid_, std::vector<double>(y.data(), y.data() + y.size()));
}

double SmallFNO::data_loss(std::span<const FieldObservation> batch, Eigen::VectorXd* grad) const {
    const auto n = static_cast<Eigen::Index>(grid_.size());
    const CMapV nu(grid_.weights().data(), n);
    double loss = 0.0;
    Tape tape;
    for (const auto& obs : batch) {
        if (!(obs.output.grid() == grid_)) throw StructuralError("FNO target grid mismatch");
        const Eigen::RowVectorXd out = run(obs.input, grad ? &tape : nullptr);
        const Eigen::RowVectorXd r = out - CMapV(obs.output.values().data(), n).transpose();
        loss += (r.array().square() * nu.transpose().array()).sum();
        if (grad) backward(tape, 2.0 * r.cwiseProduct(nu.transpose()), *grad);
    }
    return loss;
}

double fno_objective(const SmallFNO& model, std::span<const FieldObservation> batch, double scale,
                     const Eigen::VectorXd& ref, double lambda, Eigen::VectorXd* grad) {
    Eigen::VectorXd g;
    if (grad) g = Eigen::VectorXd::Zero(model.theta().size());
    double loss = scale * model.data_loss(batch, grad ? &g : nullptr);
    const Eigen::VectorXd d = model.theta() - ref;
    loss += lambda * d.squaredNorm();
    if (grad) *grad = scale * g + 2.0 * lambda * d;
    return loss;
}

double fno_dataset_loss(const SmallFNO& model, std::span<const FieldObservation> data) {
    return model.data_loss(data, nullptr);
}

FnoTrainResult fno_train(std::span<const FieldObservation> data, const Grid2D& grid, const FnoTrainConfig& cfg,
                         double lambda, Rng& rng) {
    if (cfg.epochs < 0 || cfg.batch_size < 1) throw ValidationError("invalid training schedule");
    if (!(lambda >= 0.0)) throw ValidationError("lambda must be nonnegative");
    SmallFNO model = SmallFNO::initialize(grid, cfg.model, rng);
    const Eigen::VectorXd theta0 = model.theta();
    const Eigen::VectorXd ref =
        cfg.regularization == RegularizationTarget::Initialization ? theta0 : Eigen::VectorXd::Zero(theta0.size());
    const double nan = std::numeric_limits<double>::quiet_NaN();
    FnoTrainResult res{model, theta0, nan, nan};
    if (data.empty()) return res;
    if (cfg.report_losses) res.initial_loss = fno_objective(model, data, 1.0, ref, lambda, nullptr);

    const std::size_t n = data.size();
    const std::size_t bs = std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size), n);
    const std::size_t per_epoch = (n + bs - 1) / bs;
    const std::size_t total = per_epoch * static_cast<std::size_t>(cfg.epochs);
    Eigen::VectorXd theta = theta0, grad, m1 = Eigen::VectorXd::Zero(theta0.size()), m2 = m1;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<FieldObservation> batch;
    double first = -1.0;
    std::size_t step = 0;
    const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    for (int e = 0; e < cfg.epochs; ++e) {
        for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
        for (std::size_t s = 0; s < per_epoch; ++s, ++step) {
            batch.clear();
            for (std::size_t j = s * bs; j < std::min(n, (s + 1) * bs); ++j) batch.push_back(data[order[j]]);
            const double scale = double(n) / double(batch.size());
            const double obj = fno_objective(model, batch, scale, ref, lambda, &grad);
            if (first < 0.0) first = obj;
            if (!std::isfinite(obj) || obj > cfg.divergence_factor * std::max(first, 1e-300))
                throw NumericalError("FNO training diverged at step " + std::to_string(step));
            const double lr =
                cfg.learning_rate * 0.5 * (1.0 + std::cos(std::numbers::pi * double(step) / double(total)));
            if (cfg.optimizer == Optimizer::Adam) {
                const double t = double(step + 1);
                m1 = b1 * m1 + (1.0 - b1) * grad;
                m2 = b2 * m2 + (1.0 - b2) * grad.cwiseAbs2();
                const double c1 = 1.0 - std::pow(b1, t), c2 = 1.0 - std::pow(b2, t);
                theta.array() -= lr * (m1.array() / c1) / ((m2.array() / c2).sqrt() + eps);
            } else {
                theta -= lr * grad;
            }
            model.set_theta(theta);
        }
    }
    res.model = model;
    if (cfg.report_losses) res.final_loss = fno_objective(model, data, 1.0, ref, lambda, nullptr);
    return res;
}

SmallFNO fno_train_sgd(std::span<const FieldObservation> data, const Grid2D& grid, const FnoTrainConfig& cfg,
                       double lambda, Rng& rng) {
    return fno_train(data, grid, cfg, lambda, rng).model;
}

}  // namespace nots
