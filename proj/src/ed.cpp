#include "rtfim/ed.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>

#include "rtfim/errors.hpp"

namespace rtfim {

namespace {

using Amplitudes = std::vector<cplx>;

void check_size(int n, int limit) {
    if (n <= 0) {
        throw InvalidArgument("spin chain needs at least one site");
    }
    if (n > limit) {
        throw SizeExceeded("exact diagonalisation limited to N <= " + std::to_string(limit) + ", got N = " +
                           std::to_string(n));
    }
}

inline double z_sign(std::size_t basis, int site) {
    return ((basis >> site) & 1U) ? -1.0 : 1.0;
}

// sum_n sigma^z_n sigma^z_{n+1}, periodic.
int zz_bond_sum(std::size_t basis, int n) {
    int s = 0;
    for (int i = 0; i < n; ++i) {
        const int j = (i + 1) % n;
        s += (((basis >> i) ^ (basis >> j)) & 1U) ? -1 : 1;
    }
    return s;
}

// Normalised Walsh-Hadamard transform: sigma^x basis -> sigma^z basis.
void walsh_hadamard(Amplitudes& a) {
    const std::size_t dim = a.size();
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (std::size_t len = 1; len < dim; len <<= 1) {
        for (std::size_t i = 0; i < dim; i += 2 * len) {
            for (std::size_t j = i; j < i + len; ++j) {
                const cplx x = a[j];
                const cplx y = a[j + len];
                a[j] = (x + y) * inv_sqrt2;
                a[j + len] = (x - y) * inv_sqrt2;
            }
        }
    }
}

// Majorana A_n = c_n + c_n^+ = -sigma^z_n prod_{m<n} sigma^x_m.
void add_majorana_a(int site, cplx coef, const Amplitudes& in, Amplitudes& out) {
    const std::size_t mask = (std::size_t{1} << site) - 1U;
    for (std::size_t z = 0; z < in.size(); ++z) {
        if (in[z] == cplx(0.0)) {
            continue;
        }
        const std::size_t zp = z ^ mask;
        out[zp] += -z_sign(zp, site) * coef * in[z];
    }
}

// Majorana B_n = c_n - c_n^+ = sigma^z_n sigma^x_n prod_{m<n} sigma^x_m.
void add_majorana_b(int site, cplx coef, const Amplitudes& in, Amplitudes& out) {
    const std::size_t mask = (std::size_t{1} << (site + 1)) - 1U;
    for (std::size_t z = 0; z < in.size(); ++z) {
        if (in[z] == cplx(0.0)) {
            continue;
        }
        const std::size_t zp = z ^ mask;
        out[zp] += z_sign(zp, site) * coef * in[z];
    }
}

// exp(i theta_n sigma^x_n) on every site.
void x_rotation(Amplitudes& a, int n, const std::vector<double>& theta) {
    for (int site = 0; site < n; ++site) {
        const double c = std::cos(theta[static_cast<std::size_t>(site)]);
        const cplx is(0.0, std::sin(theta[static_cast<std::size_t>(site)]));
        const std::size_t bit = std::size_t{1} << site;
        for (std::size_t z = 0; z < a.size(); ++z) {
            if (z & bit) {
                continue;
            }
            const cplx a0 = a[z];
            const cplx a1 = a[z | bit];
            a[z] = c * a0 + is * a1;
            a[z | bit] = c * a1 + is * a0;
        }
    }
}

}  // namespace

double SpinState::norm() const {
    double acc = 0.0;
    for (const auto& x : amplitudes) {
        acc += std::norm(x);
    }
    return std::sqrt(acc);
}

SpinState exact_ground_state(const FieldProfile& fields) {
    const int n = fields.n_sites();
    check_size(n, kMaxExactSites);
    const std::size_t dim = std::size_t{1} << n;

    // Even sigma^x-parity sector in the sigma^x basis: bit n set means
    // sigma^x_n = -1; sigma^z sigma^z flips two neighbouring bits.
    std::vector<std::size_t> states;
    std::vector<int> index(dim, -1);
    for (std::size_t x = 0; x < dim; ++x) {
        if (__builtin_popcountll(x) % 2 == 0) {
            index[x] = static_cast<int>(states.size());
            states.push_back(x);
        }
    }
    const auto sector = static_cast<Eigen::Index>(states.size());
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(sector, sector);
    for (Eigen::Index k = 0; k < sector; ++k) {
        const std::size_t x = states[static_cast<std::size_t>(k)];
        double diag = 0.0;
        for (int i = 0; i < n; ++i) {
            diag -= fields.g_n[static_cast<std::size_t>(i)] * z_sign(x, i);
        }
        h(k, k) = diag;
        for (int i = 0; i < n; ++i) {
            const std::size_t flipped = x ^ (std::size_t{1} << i) ^ (std::size_t{1} << ((i + 1) % n));
            h(index[flipped], k) -= 1.0;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    if (es.info() != Eigen::Success) {
        throw NumericalFailure("exact diagonalisation failed");
    }
    Eigen::VectorXd ground = es.eigenvectors().col(0);
    Eigen::Index largest = 0;
    ground.cwiseAbs().maxCoeff(&largest);
    if (ground(largest) < 0.0) {
        ground = -ground;
    }

    SpinState s;
    s.n_sites = n;
    s.amplitudes.assign(dim, cplx(0.0));
    for (Eigen::Index k = 0; k < sector; ++k) {
        s.amplitudes[states[static_cast<std::size_t>(k)]] = ground(k);
    }
    walsh_hadamard(s.amplitudes);
    return s;
}

double exact_energy(const SpinState& state, const FieldProfile& fields) {
    const int n = state.n_sites;
    if (fields.n_sites() != n) {
        throw InvalidArgument("exact_energy: size mismatch");
    }
    double e = 0.0;
    for (std::size_t z = 0; z < state.amplitudes.size(); ++z) {
        const cplx a = state.amplitudes[z];
        e -= std::norm(a) * zz_bond_sum(z, n);
        for (int i = 0; i < n; ++i) {
            const std::size_t zp = z ^ (std::size_t{1} << i);
            e -= fields.g_n[static_cast<std::size_t>(i)] * (std::conj(state.amplitudes[zp]) * a).real();
        }
    }
    return e;
}

SpinState exact_evolve(const std::vector<double>& gamma, const LinearField& field, const SpinState& initial,
                       double t0, double t1, double dt, int order) {
    const int n = initial.n_sites;
    check_size(n, kMaxExactEvolveSites);
    if (static_cast<int>(gamma.size()) != n) {
        throw InvalidArgument("exact_evolve: gamma has the wrong length");
    }
    if (!(dt > 0.0)) {
        throw NonPositiveValue("exact_evolve: dt must be positive");
    }
    std::vector<double> weights;
    if (order == 2) {
        weights = {1.0};
    } else if (order == 4) {
        const double w1 = 1.0 / (2.0 - std::cbrt(2.0));
        weights = {w1, 1.0 - 2.0 * w1, w1};
    } else {
        throw InvalidArgument("order must be 2 or 4");
    }
    SpinState s = initial;
    const double total = t1 - t0;
    if (total <= 0.0) {
        return s;
    }
    const int n_steps = std::max(1, static_cast<int>(std::ceil(total / dt - 1e-9)));
    const double h = total / n_steps;

    std::vector<int> bond_sum(s.amplitudes.size());
    for (std::size_t z = 0; z < bond_sum.size(); ++z) {
        bond_sum[z] = zz_bond_sum(z, n);
    }
    std::vector<double> theta(static_cast<std::size_t>(n));
    // exp(-i int H_x) with H_x = -sum g_n sigma^x_n is a rotation by
    // theta_n = Gamma_n L + int g.
    auto kick = [&](double a, double b) {
        const double ig = field.integral(a, b);
        for (int i = 0; i < n; ++i) {
            theta[static_cast<std::size_t>(i)] = gamma[static_cast<std::size_t>(i)] * (b - a) + ig;
        }
        x_rotation(s.amplitudes, n, theta);
    };
    // exp(i L sum sigma^z sigma^z) is diagonal; one phase per bond sum.
    std::vector<cplx> phase(static_cast<std::size_t>(2 * n + 1));
    auto ising = [&](double len) {
        for (int k = -n; k <= n; ++k) {
            phase[static_cast<std::size_t>(k + n)] = std::polar(1.0, len * k);
        }
        for (std::size_t z = 0; z < s.amplitudes.size(); ++z) {
            s.amplitudes[z] *= phase[static_cast<std::size_t>(bond_sum[z] + n)];
        }
    };

    for (int i = 0; i < n_steps; ++i) {
        double t = t0 + h * i;
        for (double w : weights) {
            const double sub = w * h;
            kick(t, t + 0.5 * sub);
            ising(sub);
            kick(t + 0.5 * sub, t + sub);
            t += sub;
        }
    }
    return s;
}

SpinState exact_quench(const DisorderRealization& r, const QuenchProtocol& p, double dt) {
    p.validate();
    const SpinState ground = exact_ground_state(effective_fields(r, p.g_init));
    return exact_evolve(r.gamma, p.field(), ground, p.t_start(), p.t_end(), dt, 4);
}

double exact_kink_density(const SpinState& state) {
    const int n = state.n_sites;
    double acc = 0.0;
    for (std::size_t z = 0; z < state.amplitudes.size(); ++z) {
        acc += std::norm(state.amplitudes[z]) * 0.5 * (n - zz_bond_sum(z, n));
    }
    return acc / n;
}

double exact_fidelity(const SpinState& state) {
    const cplx amp = (state.amplitudes.front() + state.amplitudes.back()) / std::sqrt(2.0);
    return std::norm(amp);
}

double exact_zz(const SpinState& state, int i, int j) {
    const int n = state.n_sites;
    if (i < 0 || j < 0 || i >= n || j >= n) {
        throw IndexOutOfRange("exact_zz: site outside the chain");
    }
    double acc = 0.0;
    for (std::size_t z = 0; z < state.amplitudes.size(); ++z) {
        acc += std::norm(state.amplitudes[z]) * z_sign(z, i) * z_sign(z, j);
    }
    return acc;
}

SpinState kink_vacuum_state(int n_sites) {
    check_size(n_sites, kMaxExactSites);
    SpinState s;
    s.n_sites = n_sites;
    s.amplitudes.assign(std::size_t{1} << n_sites, cplx(0.0));
    s.amplitudes.front() = 1.0 / std::sqrt(2.0);
    s.amplitudes.back() = 1.0 / std::sqrt(2.0);
    return s;
}

SpinState x_polarized_state(int n_sites) {
    check_size(n_sites, kMaxExactSites);
    SpinState s;
    s.n_sites = n_sites;
    const std::size_t dim = std::size_t{1} << n_sites;
    s.amplitudes.assign(dim, cplx(1.0 / std::sqrt(static_cast<double>(dim))));
    return s;
}

SpinState apply_quasiparticle_creation(const BogoliubovModes& modes, int b, const SpinState& state) {
    const int n = state.n_sites;
    if (modes.n_sites != n) {
        throw InvalidArgument("apply_quasiparticle_creation: size mismatch");
    }
    SpinState out;
    out.n_sites = n;
    out.amplitudes.assign(state.amplitudes.size(), cplx(0.0));
    // u c^+ + v c = (u + v)/2 A + (v - u)/2 B
    for (int site = 0; site < n; ++site) {
        const cplx u = modes.u(site, b);
        const cplx v = modes.v(site, b);
        if (u == cplx(0.0) && v == cplx(0.0)) {
            continue;
        }
        add_majorana_a(site, 0.5 * (u + v), state.amplitudes, out.amplitudes);
        add_majorana_b(site, 0.5 * (v - u), state.amplitudes, out.amplitudes);
    }
    return out;
}

SpinState apply_pair_operator(const PairWavefunction& z, const SpinState& state) {
    const int n = state.n_sites;
    const BogoliubovModes kinks = kink_basis(n);
    std::vector<SpinState> created;
    created.reserve(static_cast<std::size_t>(n));
    for (int b = 0; b < n; ++b) {
        created.push_back(apply_quasiparticle_creation(kinks, b, state));
    }
    SpinState out;
    out.n_sites = n;
    out.amplitudes.assign(state.amplitudes.size(), cplx(0.0));
    for (int a = 0; a < n; ++a) {
        SpinState mix;
        mix.n_sites = n;
        mix.amplitudes.assign(state.amplitudes.size(), cplx(0.0));
        for (int b = 0; b < n; ++b) {
            const cplx zab = 0.5 * z.Z(a, b);
            if (zab == cplx(0.0)) {
                continue;
            }
            for (std::size_t k = 0; k < mix.amplitudes.size(); ++k) {
                mix.amplitudes[k] += zab * created[static_cast<std::size_t>(b)].amplitudes[k];
            }
        }
        const SpinState term = apply_quasiparticle_creation(kinks, a, mix);
        for (std::size_t k = 0; k < out.amplitudes.size(); ++k) {
            out.amplitudes[k] += term.amplitudes[k];
        }
    }
    return out;
}

SpinState bcs_state(const PairWavefunction& z) {
    const int n = z.n_sites;
    SpinState term = kink_vacuum_state(n);
    SpinState sum = term;
    for (int k = 1; k <= n / 2; ++k) {
        term = apply_pair_operator(z, term);
        for (auto& x : term.amplitudes) {
            x /= static_cast<double>(k);
        }
        for (std::size_t i = 0; i < sum.amplitudes.size(); ++i) {
            sum.amplitudes[i] += term.amplitudes[i];
        }
    }
    const double nrm = sum.norm();
    for (auto& x : sum.amplitudes) {
        x /= nrm;
    }
    return sum;
}

double bcs_series_inverse_fidelity(const PairWavefunction& z) {
    const int n = z.n_sites;
    SpinState term = kink_vacuum_state(n);
    double acc = 1.0;
    for (int k = 1; k <= n / 2; ++k) {
        term = apply_pair_operator(z, term);
        for (auto& x : term.amplitudes) {
            x /= static_cast<double>(k);
        }
        const double nrm = term.norm();
        acc += nrm * nrm;
    }
    return acc;
}

double state_overlap(const SpinState& a, const SpinState& b) {
    if (a.amplitudes.size() != b.amplitudes.size()) {
        throw InvalidArgument("state_overlap: size mismatch");
    }
    cplx acc = 0.0;
    for (std::size_t i = 0; i < a.amplitudes.size(); ++i) {
        acc += std::conj(a.amplitudes[i]) * b.amplitudes[i];
    }
    return std::norm(acc);
}

}  // namespace rtfim
