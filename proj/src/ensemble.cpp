#include "sdr/ensemble.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <stdexcept>

namespace sdr {

void BroadeningSpec::validate() const {
    if (sigma_detuning_a < 0.0 || sigma_detuning_b < 0.0 || sigma_rabi_rel < 0.0)
        throw std::invalid_argument("broadening: sigmas must be >= 0");
    if (n_nodes < 1) throw std::invalid_argument("broadening: n_nodes must be >= 1");
}

void gauss_hermite(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    if (n < 1) throw std::invalid_argument("gauss_hermite: n must be >= 1");
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    if (n == 1) {
        nodes[0] = 0.0;
        weights[0] = std::sqrt(std::numbers::pi);
        return;
    }
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k + 1 < n; ++k) {
        const double b = std::sqrt(0.5 * (k + 1));
        jac(k, k + 1) = b;
        jac(k + 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
    for (int k = 0; k < n; ++k) {
        nodes[k] = es.eigenvalues()(k);
        const double v0 = es.eigenvectors()(0, k);
        weights[k] = std::sqrt(std::numbers::pi) * v0 * v0;
    }
}

std::vector<EnsembleMember> build_ensemble(const BroadeningSpec& spec) {
    spec.validate();

    struct Dimension {
        std::vector<double> offsets;  // physical values (offset or relative scale)
        std::vector<double> weights;  // normalized
    };

    auto gaussian_dim = [&](double sigma) {
        Dimension d;
        if (sigma == 0.0) {
            d.offsets = {0.0};
            d.weights = {1.0};
            return d;
        }
        std::vector<double> t, w;
        gauss_hermite(spec.n_nodes, t, w);
        const double norm = std::sqrt(std::numbers::pi);
        for (int k = 0; k < spec.n_nodes; ++k) {
            d.offsets.push_back(std::sqrt(2.0) * sigma * t[k]);
            d.weights.push_back(w[k] / norm);
        }
        return d;
    };

    std::vector<EnsembleMember> members;

    if (spec.scheme == BroadeningScheme::GaussHermite) {
        const Dimension da = gaussian_dim(spec.sigma_detuning_a);
        const Dimension db = gaussian_dim(spec.sigma_detuning_b);
        const Dimension dr = gaussian_dim(spec.sigma_rabi_rel);
        const double count = static_cast<double>(da.offsets.size()) * db.offsets.size() *
                             dr.offsets.size();
        if (count > 1e6)
            throw std::invalid_argument("build_ensemble: tensor grid exceeds 1e6 members");

        for (size_t ia = 0; ia < da.offsets.size(); ++ia)
            for (size_t ib = 0; ib < db.offsets.size(); ++ib)
                for (size_t ir = 0; ir < dr.offsets.size(); ++ir) {
                    const double w = da.weights[ia] * db.weights[ib] * dr.weights[ir];
                    if (w <= 1e-12) continue;
                    EnsembleMember m;
                    m.detuning_a = da.offsets[ia];
                    m.detuning_b = db.offsets[ib];
                    m.rabi_scale = 1.0 + dr.offsets[ir];
                    m.weight = w;
                    members.push_back(m);
                }
    } else {
        const bool degenerate = spec.sigma_detuning_a == 0.0 && spec.sigma_detuning_b == 0.0 &&
                                spec.sigma_rabi_rel == 0.0;
        const int n = degenerate ? 1 : spec.n_nodes;
        SplitMix64 rng(spec.seed);
        for (int k = 0; k < n; ++k) {
            EnsembleMember m;
            m.detuning_a = spec.sigma_detuning_a > 0.0 ? spec.sigma_detuning_a * rng.normal() : 0.0;
            m.detuning_b = spec.sigma_detuning_b > 0.0 ? spec.sigma_detuning_b * rng.normal() : 0.0;
            m.rabi_scale = spec.sigma_rabi_rel > 0.0 ? 1.0 + spec.sigma_rabi_rel * rng.normal() : 1.0;
            m.weight = 1.0 / n;
            members.push_back(m);
        }
    }

    double total = 0.0;
    for (const auto& m : members) total += m.weight;
    for (auto& m : members) m.weight /= total;
    return members;
}

std::vector<double> ensemble_average(const std::vector<EnsembleMember>& members,
                                     const std::vector<std::vector<double>>& series) {
    if (members.size() != series.size())
        throw std::invalid_argument("ensemble_average: member/series count mismatch");
    if (members.empty()) throw std::invalid_argument("ensemble_average: empty ensemble");
    const size_t len = series.front().size();
    for (const auto& s : series)
        if (s.size() != len) throw std::invalid_argument("ensemble_average: grid mismatch");

    std::vector<double> out(len, 0.0);
    for (size_t m = 0; m < members.size(); ++m)
        for (size_t k = 0; k < len; ++k) out[k] += members[m].weight * series[m][k];
    return out;
}

Eigen::MatrixXcd ensemble_average_states(const std::vector<EnsembleMember>& members,
                                         const std::vector<Eigen::MatrixXcd>& states) {
    if (members.size() != states.size())
        throw std::invalid_argument("ensemble_average_states: count mismatch");
    if (members.empty()) throw std::invalid_argument("ensemble_average_states: empty ensemble");
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(states.front().rows(), states.front().cols());
    for (size_t m = 0; m < members.size(); ++m) {
        if (states[m].rows() != out.rows() || states[m].cols() != out.cols())
            throw std::invalid_argument("ensemble_average_states: shape mismatch");
        out += members[m].weight * states[m];
    }
    return out;
}

void write_members_csv(const std::vector<EnsembleMember>& members, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "detuning_a,detuning_b,rabi_scale,weight\n";
    char buf[32];
    auto emit = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << buf;
    };
    for (const auto& m : members) {
        emit(m.detuning_a);
        out << ",";
        emit(m.detuning_b);
        out << ",";
        emit(m.rabi_scale);
        out << ",";
        emit(m.weight);
        out << "\n";
    }
}

std::uint64_t SplitMix64::next() {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double SplitMix64::uniform01() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double SplitMix64::uniform_open01() {
    return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
}

double SplitMix64::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    const double u = uniform_open01();
    const double v = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u));
    const double ang = 2.0 * std::numbers::pi * v;
    spare_ = r * std::sin(ang);
    have_spare_ = true;
    return r * std::cos(ang);
}

double SplitMix64::exponential(double rate) {
    if (rate <= 0.0) return std::numeric_limits<double>::infinity();
    return -std::log(uniform_open01()) / rate;
}

SplitMix64 SplitMix64::stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                              std::uint64_t c) {
    SplitMix64 mixer(seed);
    std::uint64_t s = mixer.next();
    s ^= SplitMix64(a ^ 0xa0761d6478bd642fULL).next();
    s ^= SplitMix64(b ^ 0xe7037ed1a0b428dbULL).next();
    s ^= SplitMix64(c ^ 0x8ebc6af09c88c6e3ULL).next();
    return SplitMix64(s);
}

}  // namespace sdr
