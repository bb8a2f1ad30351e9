#include "vibronic/propagator.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace vibronic {

void PropagatorConfig::validate() const {
    if (!(dt > 0.0)) throw invalid_parameter("dt must be > 0");
    if (krylov_dim_max < 2 || krylov_dim_max > 64)
        throw invalid_parameter("krylov_dim_max must be in [2, 64]");
    if (!(krylov_tol > 0.0)) throw invalid_parameter("krylov_tol must be > 0");
    if (!(drop_tol >= 0.0 && drop_tol < 1.0)) throw invalid_parameter("drop_tol must be in [0, 1)");
    if (!(t_final >= 0.0)) throw invalid_parameter("t_final must be >= 0");
    if (sample_every < 1) throw invalid_parameter("sample_every must be >= 1");
    if (!(expand_factor >= 0.0)) throw invalid_parameter("expand_factor must be >= 0");
}

namespace {

// Extended-precision accumulation keeps the Lanczos basis orthonormal to
// rounding on supports of 10^5 and more entries.
complex dot(const std::vector<complex>& a, const std::vector<complex>& b) {
    const std::size_t n = std::min(a.size(), b.size());
    long double re = 0.0L, im = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
        const complex p = std::conj(a[i]) * b[i];
        re += p.real();
        im += p.imag();
    }
    return {static_cast<double>(re), static_cast<double>(im)};
}

void axpy(complex c, const std::vector<complex>& x, std::vector<complex>& y) {
    const std::size_t n = std::min(x.size(), y.size());
    for (std::size_t i = 0; i < n; ++i) y[i] += c * x[i];
}

/// exp(-i T tau) e_1 for the symmetric tridiagonal T(alpha, beta).
Eigen::VectorXcd tridiagonal_exp_e1(const std::vector<double>& alpha, const std::vector<double>& beta,
                                    int m, double tau) {
    if (m == 1) {
        Eigen::VectorXcd u(1);
        u[0] = std::exp(complex{0.0, -alpha[0] * tau});
        return u;
    }
    Eigen::VectorXd diag(m), sub(m - 1);
    for (int i = 0; i < m; ++i) diag[i] = alpha[i];
    for (int i = 0; i < m - 1; ++i) sub[i] = beta[i];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    const auto& Q = es.eigenvectors();
    Eigen::VectorXcd phase(m);
    for (int k = 0; k < m; ++k)
        phase[k] = std::exp(complex{0.0, -es.eigenvalues()[k] * tau}) * Q(0, k);
    return Q.cast<complex>() * phase;
}

} // namespace

SparseWavefunction krylov_step(const SparseWavefunction& psi, double dt, const PropagatorConfig& cfg,
                               StepReport* report) {
    const ChainParams& params = psi.params();
    const double tau = dt * params.period() / ChainParams::hbar;
    StepReport rep;

    const double beta0 = std::sqrt(psi.norm2());
    if (beta0 == 0.0) {
        if (report) *report = rep;
        return psi;
    }

    LocalHamiltonian h(params);
    const auto& sup = psi.support();
    h.basis().reserve(2 * sup.size() + 16);
    for (std::size_t i = 0; i < sup.size(); ++i) h.basis().insert(sup.record(i));

    std::vector<std::vector<complex>> V;
    V.reserve(cfg.krylov_dim_max);
    {
        std::vector<complex> v0(psi.amplitudes().begin(), psi.amplitudes().end());
        for (auto& a : v0) a /= beta0;
        V.push_back(std::move(v0));
    }
    std::vector<std::size_t> extent{sup.size()}; // support extent of each Krylov vector
    std::vector<double> alpha, beta;
    std::vector<complex> w;
    Eigen::VectorXcd u;
    int m = 0;
    double hnorm_scale = 0.0;

    // A priori size of the coefficient of v_j in exp(-i T tau) e_1.
    double coeff_bound = 1.0;
    const double expand_base = cfg.drop_tol * cfg.expand_factor / (beta0 * beta0);

    for (int j = 0; j < cfg.krylov_dim_max; ++j) {
        if (j > 0) coeff_bound *= beta[j - 1] * tau / j;
        const double expand_threshold =
            expand_base > 0.0 ? expand_base / std::max(coeff_bound * coeff_bound, 1e-300) : 0.0;
        h.apply(V[j], w, expand_threshold);
        if (j == 0) rep.clipped = h.clipped_weight(V[0]) * beta0 * beta0;
        for (auto& v : V) v.resize(w.size());

        const double a = dot(V[j], w).real();
        alpha.push_back(a);
        axpy(-a, V[j], w);
        if (j > 0) axpy(-beta[j - 1], V[j - 1], w);
        for (int i = 0; i <= j; ++i) axpy(-dot(V[i], w), V[i], w);

        long double bb = 0.0L;
        for (const auto& x : w) bb += std::norm(x);
        const double b = std::sqrt(static_cast<double>(bb));
        hnorm_scale = std::max({hnorm_scale, std::abs(a), b});

        m = j + 1;
        u = tridiagonal_exp_e1(alpha, beta, m, tau);
        rep.residual = beta0 * b * std::abs(u[m - 1]);
        // Invariant subspace reached: the projection is exact.
        const bool breakdown = b <= 1e-14 * std::max(hnorm_scale, 1.0);
        if (breakdown) rep.residual = 0.0;
        if (breakdown || rep.residual < cfg.krylov_tol) break;
        if (j + 1 == cfg.krylov_dim_max) {
            rep.converged = false;
            break;
        }
        beta.push_back(b);
        for (auto& x : w) x /= b;
        V.push_back(w);
        extent.push_back(w.size());
    }

    // exp(-iT tau) e_1 has unit norm; strip the eigensolver's rounding from it.
    u /= u.norm();
    const std::size_t n = extent[m - 1];
    std::vector<complex> out(n, complex{});
    const complex phase = std::exp(complex{0.0, -h.energy_offset() * tau});
    for (int k = 0; k < m; ++k) {
        const auto& v = V[k];
        const complex c = beta0 * phase * u[k];
        for (std::size_t i = 0; i < extent[k]; ++i) out[i] += c * v[i];
    }

    rep.krylov_dim = m;
    rep.working_size = h.size();

    SupportSet out_support(params.L);
    out_support.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out_support.insert(h.basis().record(i));
    SparseWavefunction next(params, std::move(out_support), std::move(out), psi.leak());
    rep.dropped = next.truncate(cfg.drop_tol);
    rep.support_size = next.size();
    if (report) *report = rep;
    return next;
}

Trajectory propagate(const SparseWavefunction& psi0, const PropagatorConfig& cfg,
                     const PropagateOptions& options) {
    cfg.validate();
    constexpr double eps = 1e-12;

    // Step boundaries: the regular grid k*dt plus requested sample times.
    struct Boundary {
        double t;
        bool sample;
    };
    std::vector<Boundary> grid;
    const double t0 = options.t_start;
    const auto n_steps = static_cast<long>(std::ceil((cfg.t_final - t0) / cfg.dt - eps));
    for (long k = 1; k <= n_steps; ++k) {
        const double t = std::min(t0 + static_cast<double>(k) * cfg.dt, cfg.t_final);
        grid.push_back({t, k % cfg.sample_every == 0 || k == n_steps});
    }
    for (double ts : options.sample_times) {
        if (ts <= t0 + eps || ts > cfg.t_final + eps) continue;
        grid.push_back({ts, true});
    }
    std::sort(grid.begin(), grid.end(), [](const Boundary& a, const Boundary& b) { return a.t < b.t; });
    std::vector<Boundary> merged;
    for (const auto& b : grid) {
        if (!merged.empty() && std::abs(merged.back().t - b.t) < eps) {
            merged.back().sample = merged.back().sample || b.sample;
            continue;
        }
        merged.push_back(b);
    }

    Trajectory traj(psi0);
    SparseWavefunction psi = psi0;
    auto record = [&](double t) {
        traj.observables.append(t, psi);
        if (options.on_sample) options.on_sample(t, psi);
    };
    record(t0);

    double t = t0;
    for (const auto& b : merged) {
        StepReport rep;
        psi = krylov_step(psi, b.t - t, cfg, &rep);
        t = b.t;
        traj.step_times.push_back(t);
        traj.krylov_dims.push_back(rep.krylov_dim);
        traj.support_sizes.push_back(rep.support_size);
        traj.leak_history.push_back(psi.leak());
        traj.max_clipped = std::max(traj.max_clipped, rep.clipped);
        if (!rep.converged) {
            ++traj.flagged_steps;
            if (traj.warnings.size() < 20) {
                std::ostringstream os;
                os << "t=" << t << ": Krylov residual " << rep.residual << " above tolerance at dim "
                   << rep.krylov_dim;
                traj.warnings.push_back(os.str());
            }
        }
        if (b.sample) record(t);
    }
    traj.leak = psi.leak();
    traj.final_state = std::move(psi);
    return traj;
}

DensePropagator::DensePropagator(const ChainParams& params, std::size_t cap)
    : h_(build_dense(params, cap)) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h_.matrix);
    evals_ = es.eigenvalues();
    evecs_ = es.eigenvectors();
}

Eigen::VectorXcd DensePropagator::evolve(const Eigen::VectorXcd& v, double t) const {
    const double tau = t * h_.params.period() / ChainParams::hbar;
    Eigen::VectorXcd c = evecs_.transpose().cast<complex>() * v;
    for (Eigen::Index k = 0; k < c.size(); ++k) c[k] *= std::exp(complex{0.0, -evals_[k] * tau});
    return evecs_.cast<complex>() * c;
}

SparseWavefunction DensePropagator::evolve(const SparseWavefunction& psi, double t) const {
    auto out = h_.to_sparse(evolve(h_.to_vector(psi), t), false);
    out.set_leak(psi.leak());
    return out;
}

SparseWavefunction dense_propagate(const SparseWavefunction& psi0, double t, const ChainParams& params) {
    return DensePropagator(params).evolve(psi0, t);
}

} // namespace vibronic
