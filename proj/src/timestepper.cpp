#include "pfl/timestepper.hpp"

#include <Eigen/IterativeLinearSolvers>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pfl {

NewmarkCoeffs newmark_alphas(double gamma_tilde, double beta_tilde, double dt)
{
    if (!(dt > 0.0))
        throw ConfigError("Newmark: time step must be positive");
    if (!(beta_tilde > 0.0))
        throw ConfigError("Newmark: beta must be positive");
    NewmarkCoeffs c;
    c.gamma_tilde = gamma_tilde;
    c.beta_tilde = beta_tilde;
    c.dt = dt;
    c.alpha1 = 1.0 / (beta_tilde * dt * dt);
    c.alpha2 = 1.0 / (beta_tilde * dt);
    c.alpha3 = (1.0 - 2.0 * beta_tilde) / (2.0 * beta_tilde);
    c.alpha4 = gamma_tilde / (beta_tilde * dt);
    c.alpha5 = 1.0 - gamma_tilde / beta_tilde;
    c.alpha6 = (1.0 - gamma_tilde / (2.0 * beta_tilde)) * dt;
    return c;
}

void CaseConfig::validate() const
{
    material.validate();
    if (!(dt > 0.0))
        throw ConfigError("dt must be positive");
    if (!(pull_rate >= 0.0))
        throw ConfigError("pull rate must be non-negative");
    if (!(stop.t_max > 0.0) || stop.consecutive_steps < 1)
        throw ConfigError("invalid stop rule");
    if (case_id < 0 || case_id > 6)
        throw ConfigError("case id must be in 1..6 (or 0 for custom)");
}

PrescribedDofs tensile_bc(const Mesh& mesh, double pull_rate, double t)
{
    PrescribedDofs bc;
    std::vector<double> u, v;
    for (int n : mesh.fixed_set) {
        bc.dofs.push_back(2 * n);
        bc.dofs.push_back(2 * n + 1);
        u.insert(u.end(), {0.0, 0.0});
        v.insert(v.end(), {0.0, 0.0});
    }
    for (int n : mesh.loaded_set) {
        bc.dofs.push_back(2 * n);
        u.push_back(pull_rate * t);
        v.push_back(pull_rate);
    }
    bc.u = Eigen::Map<Vector>(u.data(), static_cast<Eigen::Index>(u.size()));
    bc.v = Eigen::Map<Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
    bc.acc = Vector::Zero(bc.u.size());
    return bc;
}

Vector SpdSolver::solve(const SparseMatrix& A, const Vector& b, const char* what)
{
    Vector x;
    if (settings_.kind == LinearSolverKind::ConjugateGradient) {
        Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
        cg.setTolerance(settings_.cg_tolerance);
        cg.setMaxIterations(settings_.cg_max_iterations);
        cg.compute(A);
        x = cg.solve(b);
        if (cg.info() != Eigen::Success) {
            std::ostringstream msg;
            msg << what << ": conjugate gradient did not converge (error " << cg.error() << ")";
            throw NumericalError(msg.str());
        }
    } else {
        if (A.nonZeros() != analysed_nnz_ || A.rows() != analysed_rows_) {
            ldlt_.analyzePattern(A);
            analysed_nnz_ = A.nonZeros();
            analysed_rows_ = A.rows();
        }
        ldlt_.factorize(A);
        if (ldlt_.info() != Eigen::Success)
            throw NumericalError(std::string(what) + ": sparse factorisation failed");
        x = ldlt_.solve(b);
    }
    if (!x.allFinite()) {
        throw NumericalError(std::string(what) + ": non-finite solution");
    }
    const double res = (A * x - b).norm();
    const double scale = std::max(b.norm(), 1e-300);
    if (!(res <= 1e-6 * scale + 1e-300)) {
        std::ostringstream msg;
        msg << what << ": linear solve residual " << res << " relative to rhs norm " << scale;
        throw NumericalError(msg.str());
    }
    return x;
}

namespace {

Vector solve_spd(SpdSolver* solver, const SparseMatrix& A, const Vector& b, const char* what)
{
    if (solver)
        return solver->solve(A, b, what);
    SpdSolver local;
    return local.solve(A, b, what);
}

// Symmetric elimination of prescribed dofs: moves A(:, c) u_c to the right-hand
// side and replaces row/column c with the identity. Keeps the sparsity pattern.
void apply_dirichlet(SparseMatrix& A, Vector& rhs, const PrescribedDofs& bc)
{
    const Eigen::Index n = A.rows();
    std::vector<char> fixed(static_cast<std::size_t>(n), 0);
    Vector ub = Vector::Zero(n);
    for (std::size_t k = 0; k < bc.dofs.size(); ++k) {
        fixed[bc.dofs[k]] = 1;
        ub(bc.dofs[k]) = bc.u(static_cast<Eigen::Index>(k));
    }
    rhs -= A * ub;
    for (Eigen::Index j = 0; j < A.outerSize(); ++j) {
        for (SparseMatrix::InnerIterator it(A, j); it; ++it) {
            if (fixed[it.row()] || fixed[j])
                it.valueRef() = (it.row() == j) ? 1.0 : 0.0;
        }
    }
    for (std::size_t k = 0; k < bc.dofs.size(); ++k)
        rhs(bc.dofs[k]) = bc.u(static_cast<Eigen::Index>(k));
}

} // namespace

Vector step_damage(const FieldState& state_n, const GlobalOperators& ops, const NewmarkCoeffs& coeffs,
                   SpdSolver* solver, double upper_bound)
{
    const double dt = coeffs.dt;
    const SparseMatrix A = ops.M_phi - dt * (ops.P_phi + ops.K_c);
    const Vector rhs = ops.M_phi * state_n.phi + dt * (ops.w_b + ops.w_c);
    Vector phi = solve_spd(solver, A, rhs, "damage step");

    // Primal-dual active set: pin nodes above the bound, release pinned nodes
    // whose reaction pulls them down.
    std::vector<char> active(static_cast<std::size_t>(phi.size()), 0);
    const double release_tol = 1e-14 * std::max(1.0, rhs.cwiseAbs().maxCoeff());
    for (int pass = 0; pass < 100; ++pass) {
        const Vector reaction = A * phi - rhs;
        PrescribedDofs pinned;
        bool changed = false;
        for (Eigen::Index i = 0; i < phi.size(); ++i) {
            char& a = active[static_cast<std::size_t>(i)];
            const char next = a ? (reaction(i) <= release_tol) : (phi(i) > upper_bound);
            changed = changed || next != a;
            a = next;
            if (a)
                pinned.dofs.push_back(static_cast<int>(i));
        }
        if (!changed)
            return phi;
        pinned.u = Vector::Constant(static_cast<Eigen::Index>(pinned.dofs.size()), upper_bound);
        SparseMatrix Ac = A;
        Vector bc = rhs;
        apply_dirichlet(Ac, bc, pinned);
        phi = solve_spd(solver, Ac, bc, "damage step");
    }
    throw NumericalError("damage step: active set did not settle");
}

MotionResult step_motion(const FieldState& state_n, const GlobalOperators& ops, const NewmarkCoeffs& c,
                         const PrescribedDofs& bc, SpdSolver* solver)
{
    SparseMatrix A = c.alpha1 * ops.M + ops.K_u + c.alpha4 * ops.K_v;
    Vector rhs = ops.M * (c.alpha1 * state_n.u + c.alpha2 * state_n.v + c.alpha3 * state_n.acc) -
                 ops.K_v * (c.alpha5 * state_n.v + c.alpha6 * state_n.acc - c.alpha4 * state_n.u) + ops.w_a;
    apply_dirichlet(A, rhs, bc);

    MotionResult r;
    r.u = solve_spd(solver, A, rhs, "motion step");
    const Vector du = r.u - state_n.u;
    r.acc = c.alpha1 * du - c.alpha2 * state_n.v - c.alpha3 * state_n.acc;
    r.v = c.alpha4 * du + c.alpha5 * state_n.v + c.alpha6 * state_n.acc;
    for (std::size_t k = 0; k < bc.dofs.size(); ++k) {
        r.v(bc.dofs[k]) = bc.v(static_cast<Eigen::Index>(k));
        r.acc(bc.dofs[k]) = bc.acc(static_cast<Eigen::Index>(k));
    }
    return r;
}

Vector step_fatigue(const FieldState& state_n, const Vector& w_d_n, const Vector& w_d_next,
                    const SparseMatrix& M_fat, double dt, SpdSolver* solver)
{
    const Vector load = w_d_n + w_d_next;
    Vector incr;
    if (M_fat.nonZeros() == M_fat.rows()) {
        incr = load.cwiseQuotient(Vector(M_fat.diagonal()));
        if (!incr.allFinite())
            throw NumericalError("fatigue step: singular lumped mass");
    } else {
        incr = solve_spd(solver, M_fat, load, "fatigue step");
    }
    return state_n.fat + 0.5 * dt * incr;
}

namespace {

bool all_finite(const FieldState& s)
{
    return s.u.allFinite() && s.v.allFinite() && s.acc.allFinite() && s.phi.allFinite() && s.fat.allFinite();
}

} // namespace

SimulationRecord run_case(const CaseConfig& config, const Mesh& mesh, const std::vector<int>& sensor_ids,
                          const StepObserver& observer)
{
    config.validate();
    mesh.validate();
    for (int id : sensor_ids)
        if (id < 0 || static_cast<std::size_t>(id) >= mesh.num_nodes())
            throw ConfigError("sensor id out of range: " + std::to_string(id));

    const PhaseFieldModel model(mesh, config.material, config.solver.lumping);
    const NewmarkCoeffs coeffs = newmark_alphas(config.gamma_tilde, config.beta_tilde, config.dt);
    SpdSolver damage_solver(config.solver), motion_solver(config.solver), fatigue_solver(config.solver);
    auto emit = [&](StepPhase phase, std::size_t step, const FieldState& s) {
        if (observer)
            observer({phase, step, s.t, s.u.norm()});
    };

    SimulationRecord rec;
    rec.case_id = config.case_id;
    rec.dt = config.dt;
    rec.sensor_ids = sensor_ids;

    FieldState state = FieldState::zeros(mesh.num_nodes());
    auto record = [&](const FieldState& s, double force, double fat_incr) {
        rec.times.push_back(s.t);
        std::vector<double> row(sensor_ids.size());
        for (std::size_t k = 0; k < sensor_ids.size(); ++k)
            row[k] = s.phi(sensor_ids[k]);
        rec.sensor_phi.push_back(std::move(row));
        rec.reaction_force.push_back(force);
        rec.applied_disp.push_back(config.pull_rate * s.t);
        rec.phi_min.push_back(s.phi.minCoeff());
        rec.phi_max.push_back(s.phi.maxCoeff());
        rec.fatigue_min_increment.push_back(fat_incr);
    };
    record(state, 0.0, 0.0);

    double peak_force = 0.0;
    int above_threshold = 0;
    const auto max_steps = static_cast<std::size_t>(std::ceil(config.stop.t_max / config.dt - 1e-9));

    for (std::size_t step = 1; step <= max_steps; ++step) {
        GlobalOperators ops = model.assemble(state);
        emit(StepPhase::Assemble, step, state);

        const Vector phi_next = step_damage(state, ops, coeffs, &damage_solver, 1.0);
        emit(StepPhase::Damage, step, state);

        FieldState next;
        next.t = config.dt * static_cast<double>(step);
        next.phi = phi_next;
        ops.K_u = model.degraded_stiffness(phi_next);
        ops.w_a = model.damage_gradient_load(phi_next);
        const PrescribedDofs bc = tensile_bc(mesh, config.pull_rate, next.t);
        MotionResult motion = step_motion(state, ops, coeffs, bc, &motion_solver);
        emit(StepPhase::Motion, step, state);
        next.u = std::move(motion.u);
        next.v = std::move(motion.v);
        next.acc = std::move(motion.acc);

        next.fat = state.fat;
        const Vector w_d_next = model.fatigue_load(next);
        next.fat = step_fatigue(state, ops.w_d, w_d_next, ops.M_fat, config.dt, &fatigue_solver);
        emit(StepPhase::Fatigue, step, next);

        if (!all_finite(next)) {
            std::ostringstream msg;
            msg << "non-finite field values at step " << step << " (t = " << next.t << " s)";
            throw SimulationAborted(msg.str(), state);
        }

        const Vector fint = model.internal_force(ops.K_u, next.u, next.v, ops.w_a);
        double force = 0.0;
        for (int n : mesh.loaded_set)
            force += fint(2 * n);
        record(next, force, (next.fat - state.fat).minCoeff());

        const double max_phi = rec.phi_max.back();
        if (max_phi >= config.stop.phi_threshold) {
            if (std::isnan(rec.failure_time))
                rec.failure_time = next.t;
            ++above_threshold;
        } else {
            above_threshold = 0;
        }
        peak_force = std::max(peak_force, force);
        state = std::move(next);

        if (above_threshold >= config.stop.consecutive_steps) {
            rec.stop_reason = "damage threshold";
            break;
        }
        if (peak_force > 0.0 && force < config.stop.force_drop_fraction * peak_force) {
            rec.stop_reason = "force drop";
            break;
        }
    }
    if (rec.stop_reason.empty())
        rec.stop_reason = "time limit";
    // Diffuse bands can lose their load capacity before any node reaches the
    // threshold; the force-drop time then stands in for failure.
    if (std::isnan(rec.failure_time) && rec.stop_reason == "force drop")
        rec.failure_time = rec.times.back();
    rec.final_state = std::move(state);
    return rec;
}

} // namespace pfl
