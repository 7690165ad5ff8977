#pragma once

#include "pfl/errors.hpp"
#include "pfl/fem.hpp"
#include "pfl/mesh.hpp"

#include <Eigen/SparseCholesky>

#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace pfl {

struct NewmarkCoeffs {
    double gamma_tilde = 0.5;
    double beta_tilde = 0.25;
    double dt = 0.0;
    double alpha1 = 0, alpha2 = 0, alpha3 = 0, alpha4 = 0, alpha5 = 0, alpha6 = 0;
};

NewmarkCoeffs newmark_alphas(double gamma_tilde, double beta_tilde, double dt);

enum class LinearSolverKind { Direct, ConjugateGradient };

struct SolverSettings {
    LinearSolverKind kind = LinearSolverKind::Direct;
    double cg_tolerance = 1e-12;
    int cg_max_iterations = 20000;
    MassLumping lumping;
};

struct StopRule {
    double phi_threshold = 0.999;
    int consecutive_steps = 200;
    double force_drop_fraction = 0.05;
    double t_max = 2.0;
};

struct CaseConfig {
    MaterialParams material;
    int case_id = 0;  // 0 = custom
    double dt = 5e-4;
    double pull_rate = 4.5e-4;
    StopRule stop;
    double gamma_tilde = 0.5;
    double beta_tilde = 0.25;
    SolverSettings solver;

    void validate() const;
};

/// Time history of one run. Sensor damage is stored row-per-step.
struct SimulationRecord {
    int case_id = 0;
    double dt = 0.0;
    std::vector<double> times;
    std::vector<int> sensor_ids;
    std::vector<std::vector<double>> sensor_phi;
    std::vector<double> reaction_force;
    std::vector<double> applied_disp;

    // Per-step diagnostics over all nodes.
    std::vector<double> phi_min, phi_max;
    std::vector<double> fatigue_min_increment;

    /// First step with max phi >= threshold; the stop time if the run ended
    /// by force drop without reaching it. NaN otherwise.
    double failure_time = std::numeric_limits<double>::quiet_NaN();
    std::string stop_reason;
    FieldState final_state;

    std::size_t num_steps() const { return times.size(); }
};

class SimulationAborted : public NumericalError {
public:
    SimulationAborted(const std::string& what, FieldState snapshot)
        : NumericalError(what), snapshot_(std::move(snapshot))
    {
    }
    const FieldState& snapshot() const { return snapshot_; }

private:
    FieldState snapshot_;
};

/// Prescribed displacement, velocity and acceleration on a set of dofs.
struct PrescribedDofs {
    std::vector<int> dofs;
    Vector u, v, acc;
};

/// Clamped fixed end, x-ramp u = rate * t on the loaded end (y free).
PrescribedDofs tensile_bc(const Mesh& mesh, double pull_rate, double t);

/// SPD sparse solver with the symbolic factorisation reused while the pattern
/// is unchanged.
class SpdSolver {
public:
    explicit SpdSolver(SolverSettings settings = {}) : settings_(settings) {}
    Vector solve(const SparseMatrix& A, const Vector& b, const char* what);

private:
    SolverSettings settings_;
    Eigen::SimplicialLDLT<SparseMatrix> ldlt_;
    Eigen::Index analysed_nnz_ = -1;
    Eigen::Index analysed_rows_ = -1;
};

/// Backward-Euler damage update:
/// [M_phi - dt (P_phi + K_c)] phi_{n+1} = M_phi phi_n + dt (w_b + w_c).
/// Nodes whose solution exceeds `upper_bound` are pinned to it and the
/// remaining nodes re-solved (active set on the kink of the potentials at 1).
Vector step_damage(const FieldState& state_n, const GlobalOperators& ops, const NewmarkCoeffs& coeffs,
                   SpdSolver* solver = nullptr,
                   double upper_bound = std::numeric_limits<double>::infinity());

struct MotionResult {
    Vector u, v, acc;
};

/// Newmark displacement update using ops.M, ops.K_u, ops.K_v and ops.w_a, which
/// the caller has evaluated with phi_{n+1}.
MotionResult step_motion(const FieldState& state_n, const GlobalOperators& ops, const NewmarkCoeffs& coeffs,
                         const PrescribedDofs& bc, SpdSolver* solver = nullptr);

/// Trapezoidal fatigue update from the fatigue loads at both ends of the step.
Vector step_fatigue(const FieldState& state_n, const Vector& w_d_n, const Vector& w_d_next,
                    const SparseMatrix& M_fat, double dt, SpdSolver* solver = nullptr);

enum class StepPhase { Assemble, Damage, Motion, Fatigue };

/// Emitted by run_case for instrumentation. `time` is the time level of the
/// kinematic state the phase consumed.
struct StepEvent {
    StepPhase phase;
    std::size_t step;
    double time;
    double u_norm;
};

using StepObserver = std::function<void(const StepEvent&)>;

SimulationRecord run_case(const CaseConfig& config, const Mesh& mesh, const std::vector<int>& sensor_ids,
                          const StepObserver& observer = {});

} // namespace pfl
