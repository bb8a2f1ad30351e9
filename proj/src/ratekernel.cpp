#include "vibronic/ratekernel.hpp"

#include <cmath>
#include <numbers>

namespace vibronic {

void KernelParams::validate() const {
    if (!(S >= 0.0)) throw invalid_parameter("Huang-Rhys factor S must be >= 0");
    if (resolution < 32) throw invalid_parameter("kernel resolution must be >= 32 points per period");
    if (!(omega > 0.0)) throw invalid_parameter("omega must be > 0");
}

KernelParams KernelParams::from_chain(const ChainParams& p, int resolution) {
    KernelParams kp;
    kp.J = p.J;
    kp.omega = p.omega;
    kp.S = p.huang_rhys();
    kp.delta_eps = p.delta_eps;
    kp.resolution = resolution;
    return kp;
}

double KernelParams::period() const { return 2.0 * std::numbers::pi / omega; }

namespace {

using cplx = std::complex<double>;

/// Simpson weights (h/3)(1,4,2,...,4,1) for n (even) intervals.
std::vector<double> simpson_weights(int n, double h) {
    std::vector<double> w(n + 1, 2.0);
    for (int i = 1; i < n; i += 2) w[i] = 4.0;
    w[0] = w[n] = 1.0;
    for (auto& x : w) x *= h / 3.0;
    return w;
}

/// sum_{i,j} x_i conj(x_j) K_{i-j} for a kernel with K_{-d} = conj(K_d).
/// The form is real; accumulation runs over lags in a fixed order.
double hermitian_toeplitz_form(const std::vector<cplx>& x, const std::vector<cplx>& K) {
    const std::size_t n = x.size();
    double diag = 0.0;
    for (const auto& v : x) diag += std::norm(v);
    double total = diag * K[0].real();
    for (std::size_t d = 1; d < n; ++d) {
        cplx c{};
        for (std::size_t i = d; i < n; ++i) c += x[i] * std::conj(x[i - d]);
        total += 2.0 * (K[d] * c).real();
    }
    return total;
}

/// Double integral over [0, t]^2 with n intervals per axis.
double kernel_integral(double t, int n, const KernelParams& kp, double delta) {
    const double h = t / n;
    const auto w = simpson_weights(n, h);
    std::vector<cplx> x(n + 1), K(n + 1);
    const double S = kp.S, om = kp.omega;
    for (int i = 0; i <= n; ++i) {
        const double tau = i * h;
        x[i] = w[i] * std::exp(cplx{0.0, 2.0 * S * std::sin(om * tau) - delta / KernelParams::hbar * tau});
        K[i] = std::exp(2.0 * S * (std::exp(cplx{0.0, -om * tau}) - 1.0));
    }
    const double J = kp.J / KernelParams::hbar;
    return J * J * hermitian_toeplitz_form(x, K);
}

int intervals_for(double t_periods, int resolution) {
    const int n = static_cast<int>(std::ceil(t_periods * resolution / 2.0 - 1e-9)) * 2;
    return std::max(n, 2);
}

/// `bound` is the a-priori upper bound |J|^2 t^2 of the kernel; near exact
/// zeros the change is judged against it instead of the value.
QuadratureResult certify(double coarse, double fine, double bound) {
    QuadratureResult r;
    r.value = coarse;
    r.refined = fine;
    r.error_estimate = std::abs(fine - coarse);
    r.converged = r.error_estimate <= 1e-6 * std::abs(fine) || r.error_estimate <= 1e-12 * bound;
    return r;
}

} // namespace

QuadratureResult kernel_q(double t, const KernelParams& kp) {
    kp.validate();
    if (t < 0.0) throw invalid_parameter("kernel_q: t must be >= 0");
    if (t == 0.0) return {};
    const double tt = t * kp.period();
    const int n = intervals_for(t, kp.resolution);
    const double J = kp.J / KernelParams::hbar;
    return certify(kernel_integral(tt, n, kp, kp.delta_eps), kernel_integral(tt, 2 * n, kp, kp.delta_eps),
                   J * J * tt * tt);
}

std::vector<QuadratureResult> kernel_table(const std::vector<double>& times, const KernelParams& kp) {
    kp.validate();
    std::vector<QuadratureResult> out(times.size());
    if (times.empty()) return out;
    double t_max = 0.0;
    for (double t : times) {
        if (t < 0.0) throw invalid_parameter("kernel_table: negative time");
        t_max = std::max(t_max, t);
    }
    const QuadratureResult last = kernel_q(t_max, kp);
    for (std::size_t k = 0; k < times.size(); ++k) {
        const double t = times[k];
        if (t == 0.0) continue;
        if (t == t_max) {
            out[k] = last;
            continue;
        }
        const double v = kernel_integral(t * kp.period(), intervals_for(t, kp.resolution), kp, kp.delta_eps);
        out[k] = QuadratureResult{v, v, last.error_estimate, last.converged};
    }
    return out;
}

namespace {

cplx fourier_integral(int m, int n, const KernelParams& kp) {
    const double T = kp.period();
    const double h = T / n;
    const auto w = simpson_weights(n, h);
    std::vector<cplx> x(n + 1), K(n + 1);
    for (int i = 0; i <= n; ++i) {
        const double tau = i * h;
        x[i] = w[i] * std::exp(cplx{0.0, 2.0 * kp.S * std::sin(kp.omega * tau)});
        K[i] = std::exp(2.0 * kp.S * (std::exp(cplx{0.0, -kp.omega * tau}) - 1.0) -
                        cplx{0.0, m * kp.omega * tau});
    }
    return hermitian_toeplitz_form(x, K) / (T * T);
}

} // namespace

FourierResult fourier_coefficient(int m, const KernelParams& kp) {
    kp.validate();
    const int n = intervals_for(1.0, kp.resolution);
    FourierResult r;
    r.value = fourier_integral(m, n, kp);
    r.refined = fourier_integral(m, 2 * n, kp);
    r.error_estimate = std::abs(r.refined - r.value);
    // The coefficients sum to one; tiny ones are judged on that absolute scale.
    r.converged = r.error_estimate <= 1e-6 * std::abs(r.refined) || r.error_estimate <= 1e-12;
    return r;
}

PeakModel make_peak_model(int m, const KernelParams& kp) {
    PeakModel pm;
    pm.m = m;
    pm.c_m = fourier_coefficient(m, kp).refined;
    pm.coupling_sq = (kp.J / KernelParams::hbar) * (kp.J / KernelParams::hbar);
    pm.omega = kp.omega;
    return pm;
}

double peak_approx(double t, double delta_eps, const PeakModel& pm) {
    const double tt = t * 2.0 * std::numbers::pi / pm.omega;
    const double x = delta_eps / KernelParams::hbar - pm.m * pm.omega;
    const double c = pm.c_m.real();
    const double xt = x * tt;
    if (std::abs(xt) < 1e-4) return pm.coupling_sq * c * tt * tt * (1.0 - xt * xt / 12.0);
    return pm.coupling_sq * 2.0 * c * (1.0 - std::cos(xt)) / (x * x);
}

BondKernels make_bond_kernels(const std::vector<double>& times, const KernelParams& kp) {
    BondKernels bk;
    bk.times = times;
    KernelParams up = kp, down = kp;
    down.delta_eps = -kp.delta_eps;
    auto f = kernel_table(times, up);
    auto b = kernel_table(times, down);
    for (std::size_t k = 0; k < times.size(); ++k) {
        bk.forward.push_back(f[k].value);
        bk.backward.push_back(b[k].value);
        bk.converged = bk.converged && f[k].converged && b[k].converged;
    }
    return bk;
}

std::vector<double> CtrwState::total() const {
    std::vector<double> out;
    for (const auto& p : populations) {
        double s = 0.0;
        for (double v : p) s += v;
        out.push_back(s);
    }
    return out;
}

CsvTable CtrwState::to_table() const {
    CsvTable t;
    t.header = {"time", "norm2", "xbar", "rmsd"};
    for (int j = 0; j < L; ++j) t.header.push_back("n_" + std::to_string(j));
    for (std::size_t k = 0; k < times.size(); ++k) {
        const auto& p = populations[k];
        double s = 0.0, mean = 0.0;
        for (int j = 0; j < L; ++j) {
            s += p[j];
            mean += j * p[j];
        }
        mean /= s;
        double var = 0.0;
        for (int j = 0; j < L; ++j) var += p[j] * (j - mean) * (j - mean);
        std::vector<double> row{times[k], s, mean, std::sqrt(std::max(var / s, 0.0))};
        row.insert(row.end(), p.begin(), p.end());
        t.rows.push_back(std::move(row));
    }
    return t;
}

CtrwState CtrwState::from_table(const CsvTable& table) {
    CtrwState st;
    while (true) {
        bool found = false;
        for (const auto& h : table.header)
            if (h == "n_" + std::to_string(st.L)) found = true;
        if (!found) break;
        ++st.L;
    }
    const auto ct = table.column("time"), c0 = table.column("n_0");
    for (const auto& row : table.rows) {
        st.times.push_back(row[ct]);
        st.populations.emplace_back(row.begin() + static_cast<std::ptrdiff_t>(c0),
                                    row.begin() + static_cast<std::ptrdiff_t>(c0 + st.L));
    }
    return st;
}

CtrwState ctrw_evolve(int L, int site0, const BondKernels& kernels) {
    if (L < 2) throw invalid_parameter("ctrw_evolve: L must be >= 2");
    if (site0 < 0 || site0 >= L) throw invalid_parameter("ctrw_evolve: initial site out of range");
    const std::size_t nt = kernels.times.size();
    if (nt == 0 || kernels.forward.size() != nt || kernels.backward.size() != nt)
        throw invalid_parameter("ctrw_evolve: kernel tables do not match the time grid");

    CtrwState st;
    st.L = L;
    std::vector<double> p(L, 0.0), next(L);
    p[site0] = 1.0;
    st.times.push_back(kernels.times[0]);
    st.populations.push_back(p);

    for (std::size_t k = 0; k + 1 < nt; ++k) {
        if (!(kernels.times[k + 1] > kernels.times[k]))
            throw invalid_parameter("ctrw_evolve: time grid must be strictly increasing");
        const double df = kernels.forward[k + 1] - kernels.forward[k];
        const double db = kernels.backward[k + 1] - kernels.backward[k];
        const double wf = std::max(0.0, df), wb = std::max(0.0, db);

        next = p;
        for (int j = 0; j < L; ++j) {
            const double out_f = (j + 1 < L) ? wf : 0.0;
            const double out_b = (j > 0) ? wb : 0.0;
            const double outflow = out_f + out_b;
            st.max_outflow = std::max(st.max_outflow, outflow);
            if (outflow > 1.0)
                throw invalid_parameter("ctrw_evolve: hop weight per step exceeds 1; refine the time grid");
            if (df < 0.0 && j + 1 < L) st.clipped_mass += -df * p[j];
            if (db < 0.0 && j > 0) st.clipped_mass += -db * p[j];
            if (j + 1 < L) {
                next[j] -= wf * p[j];
                next[j + 1] += wf * p[j];
            }
            if (j > 0) {
                next[j] -= wb * p[j];
                next[j - 1] += wb * p[j];
            }
        }
        p.swap(next);
        st.times.push_back(kernels.times[k + 1]);
        st.populations.push_back(p);
    }
    return st;
}

} // namespace vibronic
