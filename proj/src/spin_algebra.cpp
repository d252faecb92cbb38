#include "sdr/spin_algebra.hpp"

#include <algorithm>
#include <stdexcept>

namespace sdr {

namespace {

Operator pauli(Axis axis) {
    Operator m(2, 2);
    m.setZero();
    switch (axis) {
        case Axis::X:
            m(0, 1) = 1.0;
            m(1, 0) = 1.0;
            break;
        case Axis::Y:
            m(0, 1) = complex(0.0, -1.0);
            m(1, 0) = complex(0.0, 1.0);
            break;
        case Axis::Z:
            m(0, 0) = 1.0;
            m(1, 1) = -1.0;
            break;
    }
    return m;
}

}  // namespace

std::string to_string(SiteRole role) {
    switch (role) {
        case SiteRole::ElectronCe: return "electron-CE";
        case SiteRole::ElectronDb: return "electron-db";
        case SiteRole::ElectronP: return "electron-P";
        case SiteRole::NucleusP: return "nucleus-P";
    }
    return "?";
}

SpinSystem::SpinSystem(std::vector<SiteRole> site_roles) : sites(std::move(site_roles)) {
    if (sites.size() < 2 || sites.size() > 3)
        throw std::invalid_argument("SpinSystem: need 2 or 3 sites");
    for (size_t i = 0; i < sites.size(); ++i)
        for (size_t j = i + 1; j < sites.size(); ++j)
            if (sites[i] == sites[j])
                throw std::invalid_argument("SpinSystem: site roles must be unique");
}

bool SpinSystem::is_electron(int site) const {
    SiteRole r = sites.at(site);
    return r == SiteRole::ElectronCe || r == SiteRole::ElectronDb || r == SiteRole::ElectronP;
}

int SpinSystem::site_with_role(SiteRole role) const {
    for (int i = 0; i < num_sites(); ++i)
        if (sites[i] == role) return i;
    return -1;
}

SpinSystem SpinSystem::ce_db_pair() {
    return SpinSystem({SiteRole::ElectronCe, SiteRole::ElectronDb});
}

SpinSystem SpinSystem::donor_readout_triple() {
    return SpinSystem({SiteRole::ElectronP, SiteRole::ElectronDb, SiteRole::NucleusP});
}

DensityMatrix::DensityMatrix(Operator rho) {
    if (rho.rows() != rho.cols()) throw std::invalid_argument("DensityMatrix: not square");
    const double herm = max_abs(Operator(rho - rho.adjoint()));
    if (herm > 1e-12)
        throw std::invalid_argument("DensityMatrix: not Hermitian (deviation " +
                                    std::to_string(herm) + ")");
    Eigen::SelfAdjointEigenSolver<Operator> es(0.5 * (rho + rho.adjoint()),
                                               Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-9)
        throw std::invalid_argument("DensityMatrix: negative eigenvalue " +
                                    std::to_string(es.eigenvalues().minCoeff()));
    const double tr = rho.trace().real();
    if (tr < 0.0 || tr > 1.0 + 1e-9)
        throw std::invalid_argument("DensityMatrix: trace " + std::to_string(tr) +
                                    " outside [0, 1]");
    rho_ = std::move(rho);
}

DensityMatrix DensityMatrix::unchecked(Operator rho) {
    DensityMatrix dm;
    dm.rho_ = std::move(rho);
    return dm;
}

DensityMatrix DensityMatrix::pure(const Eigen::VectorXcd& ket) {
    const double n = ket.norm();
    if (n <= 0.0) throw std::invalid_argument("DensityMatrix::pure: zero ket");
    Eigen::VectorXcd k = ket / n;
    return DensityMatrix(k * k.adjoint());
}

DensityMatrix DensityMatrix::maximally_mixed(int dim) {
    return DensityMatrix(Operator::Identity(dim, dim) / static_cast<double>(dim));
}

Operator kron(const Operator& a, const Operator& b) {
    Operator c(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            c.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return c;
}

double max_abs(const Operator& m) {
    return m.cwiseAbs().maxCoeff();
}

Operator spin_operator(const SpinSystem& sys, int site, Axis axis) {
    if (site < 0 || site >= sys.num_sites())
        throw std::out_of_range("spin_operator: site " + std::to_string(site) +
                                " out of range for " + std::to_string(sys.num_sites()) +
                                " sites");
    Operator result = Operator::Identity(1, 1);
    for (int k = 0; k < sys.num_sites(); ++k) {
        if (k == site)
            result = kron(result, 0.5 * pauli(axis));
        else
            result = kron(result, Operator::Identity(2, 2));
    }
    return result;
}

Operator spin_dot(const SpinSystem& sys, int site_a, int site_b) {
    Operator d = spin_operator(sys, site_a, Axis::X) * spin_operator(sys, site_b, Axis::X);
    d += spin_operator(sys, site_a, Axis::Y) * spin_operator(sys, site_b, Axis::Y);
    d += spin_operator(sys, site_a, Axis::Z) * spin_operator(sys, site_b, Axis::Z);
    return d;
}

namespace {

// Embeds |pair><pair| of the (a, b) subspace into the full space, identity on
// the remaining sites. `amp(sa, sb)` gives the pair-state amplitude for the
// a-spin/b-spin occupations (0 = up, 1 = down).
template <typename Amp>
Operator embedded_pair_projector(const SpinSystem& sys, int a, int b, Amp amp) {
    const int n = sys.num_sites();
    const int dim = sys.dim();
    auto bit = [&](int state, int site) { return (state >> (n - 1 - site)) & 1; };
    Operator p(dim, dim);
    p.setZero();
    for (int row = 0; row < dim; ++row) {
        for (int col = 0; col < dim; ++col) {
            bool others_equal = true;
            for (int s = 0; s < n; ++s) {
                if (s == a || s == b) continue;
                if (bit(row, s) != bit(col, s)) { others_equal = false; break; }
            }
            if (!others_equal) continue;
            p(row, col) = amp(bit(row, a), bit(row, b)) * std::conj(amp(bit(col, a), bit(col, b)));
        }
    }
    return p;
}

}  // namespace

PairProjectors pair_projectors(const SpinSystem& sys, int site_a, int site_b) {
    if (site_a == site_b)
        throw std::invalid_argument("pair_projectors: sites must be distinct");
    if (site_a < 0 || site_a >= sys.num_sites() || site_b < 0 || site_b >= sys.num_sites())
        throw std::out_of_range("pair_projectors: site out of range");
    if (!sys.is_electron(site_a) || !sys.is_electron(site_b))
        throw std::invalid_argument("pair_projectors: both sites must be electrons");

    const double invsqrt2 = 1.0 / std::sqrt(2.0);
    auto singlet_amp = [&](int sa, int sb) -> complex {
        if (sa == 0 && sb == 1) return invsqrt2;
        if (sa == 1 && sb == 0) return -invsqrt2;
        return 0.0;
    };
    auto t0_amp = [&](int sa, int sb) -> complex {
        if (sa != sb) return invsqrt2;
        return 0.0;
    };
    auto tp_amp = [](int sa, int sb) -> complex { return (sa == 0 && sb == 0) ? 1.0 : 0.0; };
    auto tm_amp = [](int sa, int sb) -> complex { return (sa == 1 && sb == 1) ? 1.0 : 0.0; };

    PairProjectors p;
    p.singlet = embedded_pair_projector(sys, site_a, site_b, singlet_amp);
    p.triplet_zero = embedded_pair_projector(sys, site_a, site_b, t0_amp);
    p.triplet_plus = embedded_pair_projector(sys, site_a, site_b, tp_amp);
    p.triplet_minus = embedded_pair_projector(sys, site_a, site_b, tm_amp);
    return p;
}

PairProjectors electron_pair_projectors(const SpinSystem& sys) {
    std::vector<int> electrons;
    for (int i = 0; i < sys.num_sites(); ++i)
        if (sys.is_electron(i)) electrons.push_back(i);
    if (electrons.size() != 2)
        throw std::invalid_argument("electron_pair_projectors: system must have exactly two electron sites");
    return pair_projectors(sys, electrons[0], electrons[1]);
}

double expectation(const Operator& rho, const Operator& obs) {
    if (rho.rows() != obs.rows() || rho.cols() != obs.cols())
        throw std::invalid_argument("expectation: dimension mismatch");
    const double scale = std::max(1.0, max_abs(obs));
    if (max_abs(Operator(obs - obs.adjoint())) > 1e-10 * scale)
        throw std::invalid_argument("expectation: observable not Hermitian");
    const complex tr = (rho * obs).trace();
    if (std::abs(tr.imag()) >= 1e-10 * std::max(1.0, std::abs(tr.real())))
        throw std::runtime_error("expectation: imaginary residue " + std::to_string(tr.imag()));
    return tr.real();
}

double expectation(const DensityMatrix& rho, const Operator& obs) {
    return expectation(rho.matrix(), obs);
}

Eigen::VectorXcd basis_ket(const SpinSystem& sys, const std::vector<int>& spins_down) {
    if (static_cast<int>(spins_down.size()) != sys.num_sites())
        throw std::invalid_argument("basis_ket: need one occupation per site");
    int index = 0;
    for (int s : spins_down) {
        if (s != 0 && s != 1) throw std::invalid_argument("basis_ket: occupations are 0 or 1");
        index = (index << 1) | s;
    }
    Eigen::VectorXcd ket = Eigen::VectorXcd::Zero(sys.dim());
    ket(index) = 1.0;
    return ket;
}

Eigen::VectorXcd singlet_ket(const SpinSystem& sys, int site_a, int site_b,
                             const std::vector<int>& rest) {
    const int n = sys.num_sites();
    std::vector<int> others;
    for (int s = 0; s < n; ++s)
        if (s != site_a && s != site_b) others.push_back(s);
    if (others.size() != rest.size())
        throw std::invalid_argument("singlet_ket: rest occupation count mismatch");

    auto product = [&](int sa, int sb) {
        std::vector<int> occ(n, 0);
        occ[site_a] = sa;
        occ[site_b] = sb;
        for (size_t k = 0; k < others.size(); ++k) occ[others[k]] = rest[k];
        return basis_ket(sys, occ);
    };
    return (product(0, 1) - product(1, 0)) / std::sqrt(2.0);
}

}  // namespace sdr
