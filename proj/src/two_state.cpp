#include "dechist/two_state.hpp"

#include <cmath>
#include <numbers>

namespace dechist::twostate {

void Config::validate() const {
    if (grid_points < 2) throw std::invalid_argument("two_state: grid_points must be >= 2");
    if (box_length <= 0.0) throw std::invalid_argument("two_state: box_length must be positive");
    if (mass <= 0.0) throw std::invalid_argument("two_state: mass must be positive");
    if (hbar <= 0.0) throw std::invalid_argument("two_state: hbar must be positive");
    if (!(t_final > t1)) throw std::invalid_argument("two_state: t_final must exceed t1");
    if (!(0.0 <= region_a && region_a < region_b && region_b <= box_length))
        throw std::invalid_argument("two_state: require 0 <= region_a < region_b <= box_length");
    if (weight_a < 0.0 || weight_b < 0.0 || std::abs(weight_a + weight_b - 1.0) > 1e-12)
        throw std::invalid_argument("two_state: weights must be nonnegative and sum to 1");
    if (final_bins < 1 || final_bins > grid_points)
        throw std::invalid_argument("two_state: final_bins out of range");
}

Eigen::VectorXd window_mask(const Config& config) {
    const int n = config.grid_points;
    const double dx = config.box_length / n;
    Eigen::VectorXd mask = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
        const double x = (i + 0.5) * dx;
        if (x >= config.region_a && x < config.region_b) mask(i) = 1.0;
    }
    return mask;
}

Operator Model::projector_yes() const {
    return window.cast<Complex>().asDiagonal().toDenseMatrix();
}

Operator Model::projector_no() const {
    return (Eigen::VectorXd::Ones(window.size()) - window).cast<Complex>().asDiagonal().toDenseMatrix();
}

Model build_model(const Config& config) {
    config.validate();
    const int n = config.grid_points;
    const double length = config.box_length;

    // Kinetic term p^2/2m on the periodic grid, assembled from the
    // discrete momentum basis so evolution stays exactly unitary.
    Operator dft(n, n);
    Eigen::VectorXd energies(n);
    const double dx = length / n;
    for (int j = 0; j < n; ++j) {
        const int f = (j <= n / 2) ? j : j - n;
        const double k = 2.0 * std::numbers::pi * f / length;
        energies(j) = config.hbar * config.hbar * k * k / (2.0 * config.mass);
        for (int i = 0; i < n; ++i) {
            const double x = (i + 0.5) * dx;
            dft(i, j) = std::exp(Complex(0.0, k * x)) / std::sqrt(static_cast<double>(n));
        }
    }
    Operator h0 = dft * energies.cast<Complex>().asDiagonal() * dft.adjoint();
    h0 = (h0 + h0.adjoint()) / 2.0;

    Eigen::VectorXd mask = window_mask(config);
    if (mask.sum() < 0.5)
        throw std::invalid_argument("two_state: region covers no grid cell");

    Model model{config, std::move(h0), std::move(mask), Operator()};
    model.u_free = evolve(model.h0, config.t_final - config.t1, config.hbar);
    return model;
}

Operator kick_unitary(int s, const Eigen::VectorXd& mask, double lambda_over_hbar) {
    if (s != 1 && s != -1) throw std::invalid_argument("kick: s must be +1 or -1");
    const Eigen::Index n = mask.size();
    const Complex inside = std::exp(Complex(0.0, -lambda_over_hbar * s));
    Operator u = Operator::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) u(i, i) = mask(i) > 0.5 ? inside : Complex(1.0, 0.0);
    return u;
}

Operator kick_factor(int s, const Eigen::VectorXd& mask) {
    return kick_unitary(s, mask, std::numbers::pi / 2.0);
}

ProjectorFamily final_position_bins(const Config& config) {
    const int n = config.grid_points;
    const int bins = config.final_bins;
    std::vector<Operator> members;
    std::vector<std::string> labels;
    for (int b = 0; b < bins; ++b) {
        const int lo = (n * b) / bins;
        const int hi = (n * (b + 1)) / bins;
        Operator p = Operator::Zero(n, n);
        for (int i = lo; i < hi; ++i) p(i, i) = 1.0;
        members.push_back(std::move(p));
        labels.push_back("bin" + std::to_string(b));
    }
    return ProjectorFamily(std::move(members), std::move(labels));
}

namespace {

const StateVector& env_ket(int which) {
    static const StateVector zero = (StateVector(2) << 1.0, 0.0).finished();
    static const StateVector one = (StateVector(2) << 0.0, 1.0).finished();
    return which == 0 ? zero : one;
}

// Detector state attached to a branch. Inside the window the kick acts
// as cos(lambda/hbar) - i sin(lambda/hbar) sigma_x; at the ideal
// coupling pi/2 the yes-branch ends exactly in the flipped state, so
// roundoff-size trig components are snapped to zero.
StateVector env_branch_factor(const Model& model, int alpha1, int env_initial) {
    if (alpha1 == 1) return env_ket(env_initial);
    const double angle = model.config.lambda_over_hbar;
    double c = std::cos(angle), s = std::sin(angle);
    if (std::abs(c) < 1e-15) c = 0.0;
    if (std::abs(s) < 1e-15) s = 0.0;
    StateVector factor = c * env_ket(env_initial);
    factor += Complex(0.0, -s) * env_ket(1 - env_initial);
    return factor;
}

// Particle-space branch amplitudes: no-branch = P_a2 U P_n psi,
// yes-branch = P_a2 U P_y psi (the detector phase lives in the
// environment factor).
StateVector particle_branch(const Model& model, const ProjectorFamily& bins,
                            const StateVector& psi, int alpha1, int alpha2) {
    const Operator p1 = (alpha1 == 0) ? model.projector_yes() : model.projector_no();
    StateVector v = model.u_free * (p1 * psi);
    return bins.member(alpha2) * v;
}

}  // namespace

StateVector branch_state(const Model& model, const PureState& psi, int alpha1, int alpha2) {
    if (psi.dim() != model.config.grid_points)
        throw std::invalid_argument("branch_state: state dimension mismatch");
    if (alpha1 != 0 && alpha1 != 1) throw std::invalid_argument("branch_state: alpha1 must be 0 or 1");
    const ProjectorFamily bins = final_position_bins(model.config);
    if (alpha2 < 0 || alpha2 >= bins.size())
        throw std::invalid_argument("branch_state: alpha2 out of range");
    const StateVector particle = particle_branch(model, bins, psi.amplitudes(), alpha1, alpha2);
    return tensor(particle, env_branch_factor(model, alpha1, 0));
}

double detection_probability(const Model& model, const PureState& psi) {
    if (psi.dim() != model.config.grid_points)
        throw std::invalid_argument("detection_probability: state dimension mismatch");
    double weight = 0.0;
    for (Eigen::Index i = 0; i < model.window.size(); ++i)
        if (model.window(i) > 0.5) weight += std::norm(psi.amplitudes()(i));
    const double s = std::sin(model.config.lambda_over_hbar);
    return s * s * weight;
}

double JointTable::marginal_alpha1(int alpha1) const {
    double total = 0.0;
    for (const auto& bin : p_by_bin)
        total += bin[static_cast<std::size_t>(alpha1)][0] + bin[static_cast<std::size_t>(alpha1)][1];
    return total;
}

double JointTable::conditional_record(int alpha1, int beta) const {
    const double total = marginal_alpha1(alpha1);
    if (total <= 0.0) return 0.0;
    double joint = 0.0;
    for (const auto& bin : p_by_bin) joint += bin[static_cast<std::size_t>(alpha1)][static_cast<std::size_t>(beta)];
    return joint / total;
}

JointTable joint_prob_mixed(const Model& model, const PureState& psi) {
    const ProjectorFamily bins = final_position_bins(model.config);
    const double a = model.config.weight_a;
    const double b = model.config.weight_b;

    JointTable table;
    table.n_bins = bins.size();
    table.p_by_bin.resize(static_cast<std::size_t>(bins.size()));
    for (int a2 = 0; a2 < bins.size(); ++a2) {
        auto& cell = table.p_by_bin[static_cast<std::size_t>(a2)];
        for (int a1 = 0; a1 < 2; ++a1) {
            const double norm =
                particle_branch(model, bins, psi.amplitudes(), a1, a2).squaredNorm();
            // Mixing over the detector initial states correlates the
            // branch with rho_1 = a|0><0| + b|1><1| against its flip.
            for (int beta = 0; beta < 2; ++beta) {
                const double weight =
                    a * std::norm((env_ket(beta).adjoint() * env_branch_factor(model, a1, 0))(0)) +
                    b * std::norm((env_ket(beta).adjoint() * env_branch_factor(model, a1, 1))(0));
                cell[static_cast<std::size_t>(a1)][static_cast<std::size_t>(beta)] =
                    weight * norm;
            }
        }
    }
    return table;
}

double cosine_influence(bool x_in_region, bool y_in_region) {
    const double arg = (std::numbers::pi / 2.0) *
                       (static_cast<double>(x_in_region) - static_cast<double>(y_in_region));
    const double c = std::cos(arg);
    return std::abs(c) < 1e-15 ? 0.0 : c;
}

histories::DecoherenceMatrix history_decoherence_matrix(const Model& model,
                                                        const PureState& psi) {
    const ProjectorFamily bins = final_position_bins(model.config);
    const int n_bins = bins.size();
    const std::size_t count = 2 * static_cast<std::size_t>(n_bins);

    // Branch vectors for both detector initial states; the mixed-state
    // functional is the weighted sum of the two pure ones.
    std::vector<StateVector> branch0(count), branch1(count);
    for (int a1 = 0; a1 < 2; ++a1)
        for (int a2 = 0; a2 < n_bins; ++a2) {
            const std::size_t flat = static_cast<std::size_t>(a1) * static_cast<std::size_t>(n_bins) +
                                     static_cast<std::size_t>(a2);
            const StateVector particle =
                particle_branch(model, bins, psi.amplitudes(), a1, a2);
            branch0[flat] = tensor(particle, env_branch_factor(model, a1, 0));
            branch1[flat] = tensor(particle, env_branch_factor(model, a1, 1));
        }

    Operator d(count, count);
    for (std::size_t i = 0; i < count; ++i)
        for (std::size_t j = 0; j < count; ++j) {
            const Complex v0 = (branch0[j].adjoint() * branch0[i])(0);
            const Complex v1 = (branch1[j].adjoint() * branch1[i])(0);
            d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                model.config.weight_a * v0 + model.config.weight_b * v1;
        }
    for (Eigen::Index i = 0; i < d.rows(); ++i) d(i, i) = Complex(d(i, i).real(), 0.0);

    return histories::DecoherenceMatrix({2, n_bins}, {{"y", "n"}, bins.labels()}, std::move(d),
                                        histories::default_decoherence_tolerance);
}

ProjectorFamily detector_records(const Model& model) {
    const Operator one_s = identity(model.config.grid_points);
    const Operator r0 = tensor(one_s, (env_ket(0) * env_ket(0).adjoint()).eval());
    const Operator r1 = tensor(one_s, (env_ket(1) * env_ket(1).adjoint()).eval());
    return ProjectorFamily({r0, r1}, {"0", "1"});
}

}  // namespace dechist::twostate
