#pragma once

#include <array>
#include <vector>

#include "dechist/hilbert.hpp"
#include "dechist/histories.hpp"

namespace dechist::twostate {

/// Particle on a periodic grid, kicked once at t1 by a two-level
/// detector that flips when the particle sits in [region_a, region_b).
struct Config {
    int grid_points = 64;
    double box_length = 1.0;
    double mass = 1.0;
    double t1 = 0.0;
    double t_final = 0.1;
    double region_a = 0.375;
    double region_b = 0.625;
    double lambda_over_hbar = 1.5707963267948966;  // pi/2: ideal detector
    double hbar = 1.0;
    double weight_a = 1.0;  // detector initial state weight on |0>
    double weight_b = 0.0;  // weight on |1>
    int final_bins = 4;     // position bins of the final-time family

    void validate() const;
};

struct Model {
    Config config;
    Operator h0;             // particle kinetic Hamiltonian, momentum basis
    Eigen::VectorXd window;  // 0/1 cell mask of the detector region
    Operator u_free;         // particle evolution from t1 to t_final

    Operator projector_yes() const;  // window mask as a diagonal projector
    Operator projector_no() const;
};

/// 0/1 mask over grid cells; membership decided by cell centers with
/// the half-open convention [a, b).
Eigen::VectorXd window_mask(const Config& config);

Model build_model(const Config& config);

/// exp(-i pi s window / 2) = P_no - i s P_yes, exactly unitary.
Operator kick_factor(int s, const Eigen::VectorXd& mask);
/// General coupling: P_no + exp(-i lambda s / hbar) P_yes.
Operator kick_unitary(int s, const Eigen::VectorXd& mask, double lambda_over_hbar);

/// Final-time family: position bins partitioning the box.
ProjectorFamily final_position_bins(const Config& config);

/// Composite branch state for the history (alpha1, alpha2) with the
/// detector initially in |0>. alpha1: 0 = "y", 1 = "n". Not normalized.
StateVector branch_state(const Model& model, const PureState& psi, int alpha1, int alpha2);

/// Probability that the detector fires: sin^2(lambda/hbar) times the
/// window weight of psi.
double detection_probability(const Model& model, const PureState& psi);

struct JointTable {
    int n_bins;
    // p[alpha1][alpha2][beta]; alpha1 in {0: y, 1: n}, beta in {0, 1}.
    std::vector<std::array<std::array<double, 2>, 2>> p_by_bin;

    double p(int alpha1, int alpha2, int beta) const {
        return p_by_bin[static_cast<std::size_t>(alpha2)][static_cast<std::size_t>(alpha1)]
                       [static_cast<std::size_t>(beta)];
    }
    double marginal_alpha1(int alpha1) const;
    double conditional_record(int alpha1, int beta) const;  // p(beta | alpha1)
};

/// Joint distribution over (alpha1, alpha2, beta) for the mixed
/// detector initial state weight_a |0><0| + weight_b |1><1|.
JointTable joint_prob_mixed(const Model& model, const PureState& psi);

/// Interference factor between path pairs classified by region
/// membership at the kick time: 1 for equal flags, 0 otherwise.
double cosine_influence(bool x_in_region, bool y_in_region);

/// Decoherence functional of the (alpha1, alpha2) histories with the
/// mixed detector initial state.
histories::DecoherenceMatrix history_decoherence_matrix(const Model& model,
                                                        const PureState& psi);

/// The detector-basis records 1 x |0><0|, 1 x |1><1| on the composite
/// space (plus labels "0", "1").
ProjectorFamily detector_records(const Model& model);

}  // namespace dechist::twostate
