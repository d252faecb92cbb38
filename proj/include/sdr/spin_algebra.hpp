#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

// Spin-1/2 operator algebra on small tensor-product spaces (2 or 3 sites).
// Conventions used throughout:
//   - hbar = 1, all Hamiltonian coefficients are angular frequencies (rad/s)
//   - site 0 is the slowest-varying tensor index
//   - per-site basis kets are enumerated up = 0, down = 1

namespace sdr {

using Operator = Eigen::MatrixXcd;
using complex = std::complex<double>;

enum class SiteRole { ElectronCe, ElectronDb, ElectronP, NucleusP };
enum class Axis { X, Y, Z };

std::string to_string(SiteRole role);

struct SpinSystem {
    std::vector<SiteRole> sites;

    explicit SpinSystem(std::vector<SiteRole> site_roles);

    int num_sites() const { return static_cast<int>(sites.size()); }
    int dim() const { return 1 << sites.size(); }
    bool is_electron(int site) const;
    int site_with_role(SiteRole role) const;  // -1 if absent

    // CE-db carrier pair of the pulse experiments (4-dim).
    static SpinSystem ce_db_pair();
    // donor electron / deep-level electron / 31P nucleus triple (8-dim).
    static SpinSystem donor_readout_triple();
};

// Hermitian PSD state with trace <= 1; trace < 1 encodes pairs already lost
// to recombination or dissociation.
class DensityMatrix {
public:
    // Validating constructor: Hermitian within 1e-12, eigenvalues >= -1e-9,
    // trace in [0, 1+1e-9]. Throws std::invalid_argument otherwise.
    explicit DensityMatrix(Operator rho);

    // Skips validation; for internal propagation loops where the generator
    // guarantees the invariants.
    static DensityMatrix unchecked(Operator rho);

    const Operator& matrix() const { return rho_; }
    int dim() const { return static_cast<int>(rho_.rows()); }
    double trace() const { return rho_.trace().real(); }

    static DensityMatrix pure(const Eigen::VectorXcd& ket);
    static DensityMatrix maximally_mixed(int dim);

private:
    DensityMatrix() = default;
    Operator rho_;
};

// (1/2) * Pauli on `site`, identity elsewhere. Throws on site out of range.
Operator spin_operator(const SpinSystem& sys, int site, Axis axis);

// S_a . S_b = Sx_a Sx_b + Sy_a Sy_b + Sz_a Sz_b on the full space.
Operator spin_dot(const SpinSystem& sys, int site_a, int site_b);

struct PairProjectors {
    Operator singlet;
    Operator triplet_plus;
    Operator triplet_zero;
    Operator triplet_minus;

    Operator triplet() const { return triplet_plus + triplet_zero + triplet_minus; }
};

// Singlet/triplet projectors of the (site_a, site_b) electron pair, tensored
// with identity on any remaining site. Sites must be distinct electron sites.
PairProjectors pair_projectors(const SpinSystem& sys, int site_a, int site_b);

// Projectors of the system's two electron sites (located by role).
PairProjectors electron_pair_projectors(const SpinSystem& sys);

// Tr(rho * obs) for Hermitian obs. Imaginary residue below 1e-10 is
// discarded; anything larger throws.
double expectation(const DensityMatrix& rho, const Operator& obs);
double expectation(const Operator& rho, const Operator& obs);

// Product basis ket from per-site occupations (0 = up, 1 = down).
Eigen::VectorXcd basis_ket(const SpinSystem& sys, const std::vector<int>& spins_down);

// |S> and |T0> of the (site_a, site_b) pair, remaining sites in `rest`
// product state (indexed over the remaining sites in order).
Eigen::VectorXcd singlet_ket(const SpinSystem& sys, int site_a, int site_b,
                             const std::vector<int>& rest = {});

Operator kron(const Operator& a, const Operator& b);

double max_abs(const Operator& m);

}  // namespace sdr
