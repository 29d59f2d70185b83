#include <doctest.h>

#include <cmath>
#include <numbers>

#include "dechist/random.hpp"
#include "dechist/two_state.hpp"

using namespace dechist;
using namespace dechist::twostate;

namespace {

Config default_config() {
    Config c;
    c.grid_points = 64;
    c.box_length = 1.0;
    c.mass = 1.0;
    c.t1 = 0.0;
    c.t_final = 0.1;
    c.region_a = 0.375;  // middle quarter
    c.region_b = 0.625;
    return c;
}

PureState gaussian_state(const Config& c, double center, double sigma, double wavenumber) {
    StateVector psi(c.grid_points);
    const double dx = c.box_length / c.grid_points;
    for (int i = 0; i < c.grid_points; ++i) {
        const double x = (i + 0.5) * dx;
        psi(i) = std::exp(Complex(-(x - center) * (x - center) / (4.0 * sigma * sigma),
                                  wavenumber * x));
    }
    psi /= psi.norm();
    return PureState(std::move(psi));
}

// Pauli-x on the detector, used by the composite kick.
Operator sigma_x() {
    Operator s = Operator::Zero(2, 2);
    s(0, 1) = 1.0;
    s(1, 0) = 1.0;
    return s;
}

}  // namespace

TEST_CASE("window mask membership") {
    Config c = default_config();

    // Whole box.
    c.region_a = 0.0;
    c.region_b = 1.0;
    CHECK(window_mask(c).sum() == doctest::Approx(64.0));

    // Middle quarter, 64 cells: cells with centers in [0.375, 0.625).
    c = default_config();
    const Eigen::VectorXd mask = window_mask(c);
    // Membership oracle: direct loop over cell centers.
    for (int i = 0; i < 64; ++i) {
        const double x = (i + 0.5) / 64.0;
        CHECK(mask(i) == ((x >= 0.375 && x < 0.625) ? 1.0 : 0.0));
    }

    // Empty overlap: region squeezed between two cell centers.
    c.region_a = 0.5001;
    c.region_b = 0.5078;
    CHECK(window_mask(c).sum() == 0.0);
    CHECK_THROWS_AS(build_model(c), std::invalid_argument);
}

TEST_CASE("free Hamiltonian evolution is unitary on the grid") {
    const Model model = build_model(default_config());
    CHECK(max_abs(model.u_free.adjoint() * model.u_free - identity(64)) <= 1e-12);
}

TEST_CASE("kick factor equals the projector combination and is unitary") {
    const Model model = build_model(default_config());
    for (int s : {+1, -1}) {
        const Operator k = kick_factor(s, model.window);
        const Operator expected =
            model.projector_no() - Complex(0.0, static_cast<double>(s)) * model.projector_yes();
        CHECK(max_abs(k - expected) <= 1e-15);
        CHECK(max_abs(k.adjoint() * k - identity(64)) <= 1e-14);
    }
}

TEST_CASE("kick acts trivially outside and as a phase inside") {
    Config c = default_config();
    const Model model = build_model(c);

    const PureState outside = gaussian_state(c, 0.1, 0.02, 0.0);
    const StateVector mapped_out = kick_factor(+1, model.window) * outside.amplitudes();
    CHECK((mapped_out - outside.amplitudes()).norm() <= 1e-10);

    const PureState inside = gaussian_state(c, 0.5, 0.01, 0.0);
    const StateVector mapped_in = kick_factor(+1, model.window) * inside.amplitudes();
    CHECK((mapped_in - Complex(0.0, -1.0) * inside.amplitudes()).norm() <= 1e-10);
}

TEST_CASE("kick matches the eigendecomposition exponential oracle") {
    Rng rng(41);
    const Model model = build_model(default_config());
    // evolve-oracle with H = (pi hbar / 2) s * window as a unit-time kick.
    for (int s : {+1, -1}) {
        const Operator h =
            (std::numbers::pi / 2.0) * static_cast<double>(s) * model.projector_yes();
        const Operator oracle = evolve(h, 1.0, 1.0);
        CHECK(max_abs(kick_factor(s, model.window) - oracle) <= 1e-12);
    }
    const PureState psi = random_pure_state(rng, 64);
    const Operator h = (std::numbers::pi / 2.0) * model.projector_yes();
    CHECK((kick_factor(1, model.window) * psi.amplitudes() -
           evolve(h, 1.0, 1.0) * psi.amplitudes())
              .norm() <= 1e-12);
}

TEST_CASE("branch states are orthogonal across detector outcomes") {
    const Config c = default_config();
    const Model model = build_model(c);
    const PureState psi = gaussian_state(c, 0.3, 0.05, 40.0);

    for (int a2 = 0; a2 < c.final_bins; ++a2)
        for (int b2 = 0; b2 < c.final_bins; ++b2) {
            const StateVector yes = branch_state(model, psi, 0, a2);
            const StateVector no = branch_state(model, psi, 1, b2);
            CHECK(std::abs((no.adjoint() * yes)(0)) <= 1e-14);
        }
}

TEST_CASE("branch norms reproduce the window weight") {
    const Config c = default_config();
    const Model model = build_model(c);
    const PureState psi = gaussian_state(c, 0.45, 0.06, 25.0);

    double yes_norm = 0.0;
    for (int a2 = 0; a2 < c.final_bins; ++a2)
        yes_norm += branch_state(model, psi, 0, a2).squaredNorm();

    double window_weight = 0.0;
    for (int i = 0; i < c.grid_points; ++i)
        if (model.window(i) > 0.5) window_weight += std::norm(psi.amplitudes()(i));
    CHECK(yes_norm == doctest::Approx(window_weight).epsilon(1e-12));

    // A state supported inside the region has no "no" branch.
    const PureState inside = gaussian_state(c, 0.5, 0.015, 0.0);
    double no_norm = 0.0;
    for (int a2 = 0; a2 < c.final_bins; ++a2)
        no_norm += branch_state(model, inside, 1, a2).squaredNorm();
    CHECK(no_norm <= 1e-10);
}

TEST_CASE("detection probability against the full tensor-space oracle") {
    Config c = default_config();
    const Model model = build_model(c);
    const PureState psi = gaussian_state(c, 0.4, 0.07, 30.0);

    // Full composite simulation: kick unitary from the eigensolver,
    // free evolution, projective measurement of the detector.
    const auto oracle = [&](const Config& config, const PureState& state) {
        const Model m = build_model(config);
        const Operator h_kick = config.lambda_over_hbar * config.hbar *
                                tensor(m.projector_yes(), sigma_x());
        const Operator u_kick = evolve(h_kick, 1.0, config.hbar);
        StateVector env0 = StateVector::Zero(2);
        env0(0) = 1.0;
        StateVector full = u_kick * tensor(state.amplitudes(), env0);
        full = tensor(m.u_free, identity(2)) * full;
        StateVector env1 = StateVector::Zero(2);
        env1(1) = 1.0;
        const Operator detect =
            tensor(identity(config.grid_points), (env1 * env1.adjoint()).eval());
        return (full.adjoint() * detect * full)(0).real();
    };

    CHECK(detection_probability(model, psi) == doctest::Approx(oracle(c, psi)).epsilon(1e-10));

    // Ideal coupling: the probability is the bare window weight.
    double weight = 0.0;
    for (int i = 0; i < c.grid_points; ++i)
        if (model.window(i) > 0.5) weight += std::norm(psi.amplitudes()(i));
    CHECK(detection_probability(model, psi) == doctest::Approx(weight).epsilon(1e-12));

    // Away from the ideal coupling the sin^2 factor appears.
    c.lambda_over_hbar = 0.7;
    const Model weak = build_model(c);
    CHECK(detection_probability(weak, psi) ==
          doctest::Approx(std::sin(0.7) * std::sin(0.7) * weight).epsilon(1e-12));
    CHECK(detection_probability(weak, psi) == doctest::Approx(oracle(c, psi)).epsilon(1e-10));

    // Outside the region nothing fires.
    const PureState outside = gaussian_state(c, 0.1, 0.02, 0.0);
    CHECK(detection_probability(model, outside) <= 1e-8);
}

TEST_CASE("128-point grid detection against the composite oracle") {
    Config c = default_config();
    c.grid_points = 128;
    const Model model = build_model(c);
    const PureState psi = gaussian_state(c, 0.35, 0.05, 50.0);
    double weight = 0.0;
    for (int i = 0; i < c.grid_points; ++i)
        if (model.window(i) > 0.5) weight += std::norm(psi.amplitudes()(i));
    CHECK(detection_probability(model, psi) == doctest::Approx(weight).epsilon(1e-10));

    // Full composite evolution and projective measurement on the
    // 256-dimensional space.
    const Operator h_kick =
        c.lambda_over_hbar * c.hbar * tensor(model.projector_yes(), sigma_x());
    StateVector env0 = StateVector::Zero(2);
    env0(0) = 1.0;
    StateVector full = evolve(h_kick, 1.0, c.hbar) * tensor(psi.amplitudes(), env0);
    full = tensor(model.u_free, identity(2)) * full;
    StateVector env1 = StateVector::Zero(2);
    env1(1) = 1.0;
    const double oracle =
        (full.adjoint() *
         tensor(identity(c.grid_points), (env1 * env1.adjoint()).eval()) * full)(0)
            .real();
    CHECK(detection_probability(model, psi) == doctest::Approx(oracle).epsilon(1e-10));
}

TEST_CASE("detector-basis records reproduce exactly their own branches") {
    const Config c = default_config();
    const Model model = build_model(c);
    const PureState psi = gaussian_state(c, 0.4, 0.08, 20.0);
    const ProjectorFamily records = detector_records(model);

    for (int a1 = 0; a1 < 2; ++a1)
        for (int a2 = 0; a2 < c.final_bins; ++a2) {
            const StateVector branch = branch_state(model, psi, a1, a2);
            const int own = (a1 == 0) ? 1 : 0;  // yes-branch flips the detector
            CHECK((records.member(own) * branch - branch).norm() <= 1e-14);
            CHECK((records.member(1 - own) * branch).norm() <= 1e-14);
        }
}

TEST_CASE("cosine influence truth table") {
    CHECK(cosine_influence(true, true) == 1.0);
    CHECK(cosine_influence(false, false) == 1.0);
    CHECK(cosine_influence(true, false) == 0.0);
    CHECK(cosine_influence(false, true) == 0.0);
}

TEST_CASE("history decoherence matrix is exactly decoherent") {
    const Config c = default_config();
    const Model model = build_model(c);
    const PureState psi = gaussian_state(c, 0.4, 0.08, 20.0);

    const histories::DecoherenceMatrix d = history_decoherence_matrix(model, psi);
    CHECK(histories::decoherence_defect(d) <= 1e-12);
    CHECK(std::abs(d.entries().sum() - Complex(1.0, 0.0)) <= 1e-10);

    // The decoherence pattern across detector outcomes follows the
    // cosine influence table: entries with differing flags vanish.
    for (int a2 = 0; a2 < c.final_bins; ++a2)
        CHECK(std::abs(d.entry({0, a2}, {1, a2})) <= 1e-14);
}

TEST_CASE("exact decoherence holds for random states and any final family") {
    Rng rng(42);
    for (int bins : {1, 2, 8}) {
        Config c = default_config();
        c.final_bins = bins;
        const Model model = build_model(c);
        for (int trial = 0; trial < 3; ++trial) {
            const PureState psi = random_pure_state(rng, c.grid_points);
            const histories::DecoherenceMatrix d = history_decoherence_matrix(model, psi);
            CHECK(histories::decoherence_defect(d) <= 1e-12);
            CHECK(std::abs(d.entries().sum() - Complex(1.0, 0.0)) <= 1e-10);
        }
    }
}

TEST_CASE("history probabilities marginalize to the detection probability") {
    const Config c = default_config();
    const Model model = build_model(c);
    const PureState psi = gaussian_state(c, 0.4, 0.08, 20.0);

    const histories::DecoherenceMatrix d = history_decoherence_matrix(model, psi);
    const histories::ProbabilityTable table = histories::probabilities(d);
    CHECK(table.sum_rule_defect <= 1e-12);

    double p_yes = 0.0, total = 0.0;
    for (std::size_t i = 0; i < table.p.size(); ++i) {
        if (d.index_at(i)[0] == 0) p_yes += table.p[i];
        total += table.p[i];
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p_yes == doctest::Approx(detection_probability(model, psi)).epsilon(1e-12));
}

TEST_CASE("unitarity of the full kicked evolution") {
    const Config c = default_config();
    const Model model = build_model(c);
    const Operator h_kick =
        c.lambda_over_hbar * c.hbar * tensor(model.projector_yes(), sigma_x());
    const Operator full = tensor(model.u_free, identity(2)) * evolve(h_kick, 1.0, c.hbar);
    CHECK(max_abs(full.adjoint() * full - identity(2 * c.grid_points)) <= 1e-12);
}

TEST_CASE("joint table: pure environment gives perfect records") {
    Config c = default_config();
    const Model model = build_model(c);
    const PureState psi = gaussian_state(c, 0.42, 0.06, 35.0);

    const JointTable table = joint_prob_mixed(model, psi);
    CHECK(table.conditional_record(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(table.conditional_record(1, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(table.marginal_alpha1(0) + table.marginal_alpha1(1) ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("joint table matches the direct trace oracle for mixed weights") {
    Config c = default_config();
    c.weight_a = 0.7;
    c.weight_b = 0.3;
    const Model model = build_model(c);
    const PureState psi = gaussian_state(c, 0.42, 0.06, 35.0);
    const JointTable table = joint_prob_mixed(model, psi);

    // Direct trace oracle: assemble the composite operator
    // |no><no| x rho1 + |yes><yes| x rho2 and trace against the records.
    StateVector env0 = StateVector::Zero(2), env1 = StateVector::Zero(2);
    env0(0) = 1.0;
    env1(1) = 1.0;
    const Operator rho1 =
        c.weight_a * (env0 * env0.adjoint()) + c.weight_b * (env1 * env1.adjoint());
    const Operator rho2 =
        c.weight_b * (env0 * env0.adjoint()) + c.weight_a * (env1 * env1.adjoint());
    const ProjectorFamily bins = final_position_bins(c);
    const ProjectorFamily records = detector_records(model);

    for (int a2 = 0; a2 < c.final_bins; ++a2) {
        const StateVector no_branch =
            bins.member(a2) * (model.u_free * (model.projector_no() * psi.amplitudes()));
        const StateVector yes_branch =
            Complex(0.0, -1.0) *
            (bins.member(a2) * (model.u_free * (model.projector_yes() * psi.amplitudes())));

        const Operator no_block = tensor((no_branch * no_branch.adjoint()).eval(), rho1);
        const Operator yes_block = tensor((yes_branch * yes_branch.adjoint()).eval(), rho2);
        for (int beta = 0; beta < 2; ++beta) {
            const double oracle_no = (records.member(beta) * no_block).trace().real();
            const double oracle_yes = (records.member(beta) * yes_block).trace().real();
            CHECK(table.p(1, a2, beta) == doctest::Approx(oracle_no).epsilon(1e-10));
            CHECK(table.p(0, a2, beta) == doctest::Approx(oracle_yes).epsilon(1e-10));
        }
    }

    // Record degradation: the best conditional equals the larger weight.
    CHECK(table.conditional_record(0, 1) == doctest::Approx(0.7).epsilon(1e-10));
    CHECK(table.conditional_record(1, 0) == doctest::Approx(0.7).epsilon(1e-10));

    // Decoherence is preserved under mixing.
    const histories::DecoherenceMatrix d = history_decoherence_matrix(model, psi);
    CHECK(histories::decoherence_defect(d) <= 1e-12);
}

TEST_CASE("degenerate mixture reduces to the pure table") {
    Config c = default_config();
    c.weight_a = 1.0;
    c.weight_b = 0.0;
    const Model model = build_model(c);
    const PureState psi = gaussian_state(c, 0.42, 0.06, 35.0);
    const JointTable table = joint_prob_mixed(model, psi);
    for (int a2 = 0; a2 < c.final_bins; ++a2) {
        CHECK(table.p(0, a2, 0) == 0.0);
        CHECK(table.p(1, a2, 1) == 0.0);
    }
    CHECK(table.conditional_record(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("half-half mixture erases the record") {
    Config c = default_config();
    c.weight_a = 0.5;
    c.weight_b = 0.5;
    const Model model = build_model(c);
    const PureState psi = gaussian_state(c, 0.42, 0.06, 35.0);
    const JointTable table = joint_prob_mixed(model, psi);
    for (int beta = 0; beta < 2; ++beta) {
        CHECK(table.conditional_record(0, beta) == doctest::Approx(0.5).epsilon(1e-10));
        CHECK(table.conditional_record(1, beta) == doctest::Approx(0.5).epsilon(1e-10));
    }
}

TEST_CASE("general coupling branches match the composite evolution oracle") {
    Config c = default_config();
    c.lambda_over_hbar = 0.7;  // partial measurement
    const Model model = build_model(c);
    const PureState psi = gaussian_state(c, 0.42, 0.06, 35.0);
    const ProjectorFamily bins = final_position_bins(c);

    // Composite oracle: kick unitary, free evolution, projections.
    const Operator kick =
        evolve(c.lambda_over_hbar * c.hbar * tensor(model.projector_yes(), sigma_x()), 1.0,
               c.hbar);
    const Operator u_full = tensor(model.u_free, identity(2)) * kick;
    StateVector env0 = StateVector::Zero(2);
    env0(0) = 1.0;

    for (int a1 = 0; a1 < 2; ++a1)
        for (int a2 = 0; a2 < c.final_bins; ++a2) {
            const Operator p1 = tensor(
                a1 == 0 ? model.projector_yes() : model.projector_no(), identity(2));
            const Operator p2 = tensor(bins.member(a2), identity(2));
            const StateVector oracle =
                p2 * (u_full * (p1 * tensor(psi.amplitudes(), env0)));
            const StateVector branch = branch_state(model, psi, a1, a2);
            CHECK((branch - oracle).norm() <= 1e-12);
        }

    // Partial measurement: the yes/no branches are no longer exactly
    // orthogonal and the histories only partially decohere.
    const histories::DecoherenceMatrix d = history_decoherence_matrix(model, psi);
    CHECK(histories::decoherence_defect(d) > 1e-3);

    // The joint table still matches the composite trace oracle.
    c.weight_a = 0.6;
    c.weight_b = 0.4;
    const Model mixed_model = build_model(c);
    const JointTable table = joint_prob_mixed(mixed_model, psi);
    StateVector env1 = StateVector::Zero(2);
    env1(1) = 1.0;
    const ProjectorFamily records = detector_records(mixed_model);
    for (int a1 = 0; a1 < 2; ++a1)
        for (int a2 = 0; a2 < c.final_bins; ++a2) {
            const Operator p1 = tensor(
                a1 == 0 ? mixed_model.projector_yes() : mixed_model.projector_no(), identity(2));
            const Operator p2 = tensor(bins.member(a2), identity(2));
            for (int beta = 0; beta < 2; ++beta) {
                double oracle = 0.0;
                for (auto [weight, env] : {std::pair{0.6, env0}, std::pair{0.4, env1}}) {
                    const StateVector branch =
                        p2 * (u_full * (p1 * tensor(psi.amplitudes(), env)));
                    oracle +=
                        weight * (branch.adjoint() * records.member(beta) * branch)(0).real();
                }
                CHECK(table.p(a1, a2, beta) == doctest::Approx(oracle).epsilon(1e-10));
            }
        }
}

TEST_CASE("config validation") {
    Config c = default_config();
    c.region_a = 0.7;
    c.region_b = 0.3;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = default_config();
    c.weight_a = 0.6;
    c.weight_b = 0.6;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = default_config();
    c.t_final = c.t1;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}
