#include "cptrank/solver.hpp"

#include "cptrank/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

namespace cptrank {

std::string to_string(StartInfo start) {
    switch (start.kind) {
        case StartKind::random: return "random:" + std::to_string(start.index);
        case StartKind::nvec: return "nvec";
        case StartKind::warm: return "warm";
    }
    return "unknown";
}

void SolverConfig::validate() const {
    if (max_iters < 1) throw StructuralError("max_iters must be >= 1");
    if (!(rel_fit_tol >= 0.0) || !(abs_fit_tol >= 0.0)) throw StructuralError("fit tolerances must be >= 0");
    if (!(lm_damping_init > 0.0)) throw StructuralError("lm_damping_init must be > 0");
    if (!(lm_damping_grow > 1.0)) throw StructuralError("lm_damping_grow must be > 1");
    if (!(lm_damping_shrink > 0.0 && lm_damping_shrink < 1.0)) {
        throw StructuralError("lm_damping_shrink must lie in (0,1)");
    }
    if (n_random_starts < 0) throw StructuralError("n_random_starts must be >= 0");
}

namespace {

void check_problem(const Tensor& target, std::size_t rank, const CPModel& init) {
    if (rank == 0) throw StructuralError("rank must be >= 1");
    if (init.dims() != target.dims()) {
        throw StructuralError("initial model dims " + format_dims(init.dims()) + " do not match target " +
                              format_dims(target.dims()));
    }
    if (init.rank() != rank) {
        throw StructuralError("initial model has rank " + std::to_string(init.rank()) + ", expected " +
                              std::to_string(rank));
    }
}

FitResult finish(const Tensor& target, CPModel model, int iterations, bool converged,
                 std::vector<double> history = {}) {
    const Tensor approx = reconstruct(model);
    FitResult out;
    out.frob_error = frobenius_dist(approx, target);
    out.max_error = max_abs_diff(approx, target);
    out.model = std::move(model);
    out.iterations = iterations;
    out.converged = converged;
    out.history = std::move(history);
    return out;
}

std::vector<Matrix> grams(const std::vector<Matrix>& factors) {
    std::vector<Matrix> g;
    g.reserve(factors.size());
    for (const auto& f : factors) g.push_back(f.transpose() * f);
    return g;
}

/// Hadamard product of all Gram matrices except those of the listed modes.
Matrix hadamard_except(const std::vector<Matrix>& g, std::size_t skip_a, std::size_t skip_b) {
    const Eigen::Index r = g.front().rows();
    Matrix out = Matrix::Ones(r, r);
    for (std::size_t m = 0; m < g.size(); ++m) {
        if (m != skip_a && m != skip_b) out = out.cwiseProduct(g[m]);
    }
    return out;
}

/// Khatri-Rao product of every factor except `mode`, in mode order.
Matrix khatri_rao_except(const std::vector<Matrix>& factors, std::size_t mode) {
    std::vector<Matrix> others;
    for (std::size_t j = 0; j < factors.size(); ++j) {
        if (j != mode) others.push_back(factors[j]);
    }
    if (others.empty()) return Matrix::Ones(1, factors.front().cols());
    return khatri_rao(others);
}

Matrix symmetric_pinv(const Matrix& v) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(v);
    const Vector& vals = eig.eigenvalues();
    const double top = vals.cwiseAbs().maxCoeff();
    Vector inv = Vector::Zero(vals.size());
    for (Eigen::Index i = 0; i < vals.size(); ++i) {
        if (top > 0.0 && std::abs(vals(i)) > kPinvCutoff * top) inv(i) = 1.0 / vals(i);
    }
    return eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
}

Tensor residual(const Tensor& target, const CPModel& model) {
    const Tensor approx = reconstruct(model);
    std::vector<double> diff(approx.size());
    auto a = approx.data();
    auto t = target.data();
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = a[i] - t[i];
    return Tensor::from_flat(target.dims(), std::move(diff));
}

double squared_norm(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
}

}  // namespace

FitResult als_decompose(const Tensor& target, std::size_t rank, const CPModel& init, const SolverConfig& config) {
    config.validate();
    check_problem(target, rank, init);

    const std::size_t k = target.order();
    std::vector<Matrix> unfolded;
    for (std::size_t m = 0; m < k; ++m) unfolded.push_back(unfold(target, m));

    std::vector<Matrix> factors = init.absorbed().factors();
    double err = frobenius_dist(reconstruct(CPModel(factors)), target);
    if (!std::isfinite(err)) throw SolverError("ALS: initial residual is not finite");

    std::vector<Matrix> best = factors;
    double best_err = err;
    std::vector<double> history{err};
    bool converged = err < config.abs_fit_tol;
    int iter = 0;
    while (!converged && iter < config.max_iters) {
        ++iter;
        for (std::size_t m = 0; m < k; ++m) {
            const Matrix v = hadamard_except(grams(factors), m, m);
            factors[m] = unfolded[m] * khatri_rao_except(factors, m) * symmetric_pinv(v);
        }
        const double next = frobenius_dist(reconstruct(CPModel(factors)), target);
        if (!std::isfinite(next)) throw SolverError("ALS: residual became non-finite");
        history.push_back(next);
        if (next <= best_err) {
            best_err = next;
            best = factors;
        }
        if (next < config.abs_fit_tol || (err > 0.0 && (err - next) / err < config.rel_fit_tol)) converged = true;
        err = next;
    }
    return finish(target, CPModel(std::move(best)), iter, converged, std::move(history));
}

namespace lm {

Vector flatten(const CPModel& model) {
    Eigen::Index total = 0;
    for (const auto& f : model.factors()) total += f.size();
    Vector theta(total);
    Eigen::Index off = 0;
    for (const auto& f : model.factors()) {
        theta.segment(off, f.size()) = f.reshaped();
        off += f.size();
    }
    return theta;
}

CPModel unflatten(const Vector& theta, const Dims& dims, std::size_t rank) {
    std::vector<Matrix> factors;
    Eigen::Index off = 0;
    const auto r = static_cast<Eigen::Index>(rank);
    for (std::size_t n : dims) {
        const auto rows = static_cast<Eigen::Index>(n);
        if (off + rows * r > theta.size()) throw StructuralError("parameter vector too short for dims");
        factors.push_back(theta.segment(off, rows * r).reshaped(rows, r));
        off += rows * r;
    }
    if (off != theta.size()) throw StructuralError("parameter vector too long for dims");
    return CPModel(std::move(factors));
}

double objective(const Tensor& target, const CPModel& model) {
    return 0.5 * squared_norm(residual(target, model).data());
}

namespace {

Vector gradient_from_residual(const Tensor& res, const std::vector<Matrix>& factors) {
    Eigen::Index total = 0;
    for (const auto& f : factors) total += f.size();
    Vector g(total);
    Eigen::Index off = 0;
    for (std::size_t j = 0; j < factors.size(); ++j) {
        const Matrix gj = unfold(res, j) * khatri_rao_except(factors, j);
        g.segment(off, gj.size()) = gj.reshaped();
        off += gj.size();
    }
    return g;
}

}  // namespace

Vector gradient(const Tensor& target, const CPModel& model) {
    return gradient_from_residual(residual(target, model), model.absorbed().factors());
}

Matrix gauss_newton_matrix(const CPModel& model) {
    const CPModel absorbed = model.absorbed();
    const auto& a = absorbed.factors();
    const std::size_t k = a.size();
    const Eigen::Index r = static_cast<Eigen::Index>(model.rank());
    const std::vector<Matrix> g = grams(a);

    std::vector<Eigen::Index> offset(k + 1, 0);
    for (std::size_t j = 0; j < k; ++j) offset[j + 1] = offset[j] + a[j].size();
    Matrix h = Matrix::Zero(offset[k], offset[k]);

    for (std::size_t j = 0; j < k; ++j) {
        const Eigen::Index nj = a[j].rows();
        // Diagonal block: Γ_jj(t,s) on each row-matched pair.
        const Matrix gamma = hadamard_except(g, j, j);
        for (Eigen::Index t = 0; t < r; ++t) {
            for (Eigen::Index s = 0; s < r; ++s) {
                for (Eigen::Index i = 0; i < nj; ++i) h(offset[j] + t * nj + i, offset[j] + s * nj + i) = gamma(t, s);
            }
        }
        // Off-diagonal blocks: A_j(i,s) A_l(i',t) Γ_jl(t,s).
        for (std::size_t l = j + 1; l < k; ++l) {
            const Eigen::Index nl = a[l].rows();
            const Matrix gjl = hadamard_except(g, j, l);
            for (Eigen::Index t = 0; t < r; ++t) {
                for (Eigen::Index s = 0; s < r; ++s) {
                    const double c = gjl(t, s);
                    for (Eigen::Index i = 0; i < nj; ++i) {
                        const double left = a[j](i, s) * c;
                        for (Eigen::Index ip = 0; ip < nl; ++ip) {
                            const double v = left * a[l](ip, t);
                            h(offset[j] + t * nj + i, offset[l] + s * nl + ip) = v;
                            h(offset[l] + s * nl + ip, offset[j] + t * nj + i) = v;
                        }
                    }
                }
            }
        }
    }
    return h;
}

}  // namespace lm

FitResult lm_decompose(const Tensor& target, std::size_t rank, const CPModel& init, const SolverConfig& config) {
    config.validate();
    check_problem(target, rank, init);

    const Dims& dims = target.dims();
    CPModel model = init.absorbed();
    Tensor res = residual(target, model);
    double f = 0.5 * squared_norm(res.data());
    if (!std::isfinite(f)) throw SolverError("LM: initial residual is not finite");

    double lambda = config.lm_damping_init;
    bool converged = std::sqrt(2.0 * f) < config.abs_fit_tol;
    bool stalled = false;
    int iter = 0;
    std::vector<double> history{std::sqrt(2.0 * f)};
    while (!converged && !stalled && iter < config.max_iters) {
        ++iter;
        const Vector g = lm::gradient_from_residual(res, model.factors());
        const Matrix h = lm::gauss_newton_matrix(model);
        const Vector theta = lm::flatten(model);
        const Matrix eye = Matrix::Identity(h.rows(), h.cols());

        bool accepted = false;
        while (!accepted) {
            Eigen::LLT<Matrix> llt(h + lambda * eye);
            if (llt.info() == Eigen::Success) {
                const Vector step = llt.solve(-g);
                CPModel candidate = lm::unflatten(theta + step, dims, rank);
                Tensor cand_res = residual(target, candidate);
                const double cand_f = 0.5 * squared_norm(cand_res.data());
                if (std::isfinite(cand_f) && cand_f < f) {
                    const double old_err = std::sqrt(2.0 * f);
                    const double new_err = std::sqrt(2.0 * cand_f);
                    model = std::move(candidate);
                    res = std::move(cand_res);
                    f = cand_f;
                    history.push_back(new_err);
                    lambda = std::max(lambda * config.lm_damping_shrink, std::numeric_limits<double>::min());
                    accepted = true;
                    if (new_err < config.abs_fit_tol || (old_err - new_err) / old_err < config.rel_fit_tol) {
                        converged = true;
                    }
                    continue;
                }
            }
            lambda *= config.lm_damping_grow;
            if (lambda > kMaxDamping) {
                stalled = true;
                break;
            }
        }
    }
    return finish(target, std::move(model), iter, converged, std::move(history));
}

CPModel random_init(const Dims& dims, std::size_t rank, Rng& rng) {
    if (rank == 0) throw StructuralError("rank must be >= 1");
    std::vector<Matrix> factors;
    for (std::size_t n : dims) {
        Matrix f(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(rank));
        for (Eigen::Index i = 0; i < f.rows(); ++i) {
            for (Eigen::Index t = 0; t < f.cols(); ++t) f(i, t) = rng.uniform();
        }
        factors.push_back(std::move(f));
    }
    return CPModel(std::move(factors));
}

CPModel extend_rank(const CPModel& base, Rng& rng, double scale) {
    const CPModel a = base.absorbed();
    std::vector<Matrix> factors;
    for (const auto& f : a.factors()) {
        Matrix g(f.rows(), f.cols() + 1);
        g.leftCols(f.cols()) = f;
        for (Eigen::Index i = 0; i < f.rows(); ++i) g(i, f.cols()) = scale * rng.uniform();
        factors.push_back(std::move(g));
    }
    return CPModel(std::move(factors));
}

CPModel nvec_init(const Tensor& target, std::size_t rank, std::uint64_t seed) {
    if (rank == 0) throw StructuralError("rank must be >= 1");
    Rng rng(seed);
    const auto r = static_cast<Eigen::Index>(rank);
    std::vector<Matrix> factors;
    for (std::size_t mode = 0; mode < target.order(); ++mode) {
        const Matrix x = unfold(target, mode);
        const Eigen::Index n = x.rows();
        // Left singular vectors of X are the eigenvectors of X Xᵀ.
        Eigen::SelfAdjointEigenSolver<Matrix> eig(x * x.transpose());
        const Vector& vals = eig.eigenvalues();  // ascending
        const double top = std::sqrt(std::max(vals(n - 1), 0.0));

        Matrix f(n, r);
        Eigen::Index filled = 0;
        for (Eigen::Index c = n - 1; c >= 0 && filled < r; --c) {
            const double sigma = std::sqrt(std::max(vals(c), 0.0));
            if (top <= 0.0 || sigma <= 1e-10 * top) break;
            Vector u = eig.eigenvectors().col(c);
            Eigen::Index pivot = 0;
            u.cwiseAbs().maxCoeff(&pivot);
            if (u(pivot) < 0.0) u = -u;
            f.col(filled++) = u;
        }
        for (; filled < r; ++filled) {
            Vector u(n);
            for (Eigen::Index i = 0; i < n; ++i) u(i) = rng.uniform();
            const double norm = u.norm();
            if (norm > 0.0) {
                u /= norm;
            } else {
                u(0) = 1.0;
            }
            f.col(filled) = u;
        }
        factors.push_back(std::move(f));
    }
    return CPModel(std::move(factors));
}

namespace {

bool better(const FitResult& a, const FitResult& b) {
    return std::tie(a.max_error, a.frob_error, a.start.index) < std::tie(b.max_error, b.frob_error, b.start.index);
}

}  // namespace

FitResult multi_start_decompose(const Tensor& target, std::size_t rank, const SolverConfig& config,
                                const std::optional<CPModel>& warm) {
    config.validate();
    const auto n_random = static_cast<std::size_t>(config.n_random_starts);
    if (n_random == 0 && !config.use_nvec_start && !warm) {
        throw StructuralError("multi-start needs at least one starting point");
    }

    std::optional<FitResult> best;
    std::string last_failure;
    auto consider = [&](FitResult fit) {
        if (!best || better(fit, *best)) best = std::move(fit);
    };
    auto run = [&](const CPModel& init, StartInfo start) {
        try {
            FitResult fit = lm_decompose(target, rank, init, config);
            fit.start = start;
            consider(std::move(fit));
        } catch (const SolverError& e) {
            last_failure = e.what();
        }
    };

    for (std::size_t i = 0; i < n_random; ++i) {
        Rng rng(config.seed + i);
        run(random_init(target.dims(), rank, rng), {StartKind::random, i});
    }
    if (config.use_nvec_start) {
        run(nvec_init(target, rank, config.seed + n_random), {StartKind::nvec, n_random});
    }
    if (warm) {
        const std::size_t index = n_random + 1;
        if (warm->dims() != target.dims() || warm->rank() + 1 != rank) {
            throw StructuralError("warm start must have the target's dims and rank - 1");
        }
        Rng rng(config.seed + index);
        run(extend_rank(*warm, rng, 1e-2), {StartKind::warm, index});
        // The warm model padded with a zero term reproduces its own error exactly.
        Rng unused(0);
        FitResult keep = finish(target, extend_rank(*warm, unused, 0.0), 0, false);
        keep.start = {StartKind::warm, index};
        consider(std::move(keep));
    }
    if (!best) throw SolverError("every start failed: " + last_failure);
    return std::move(*best);
}

}  // namespace cptrank
