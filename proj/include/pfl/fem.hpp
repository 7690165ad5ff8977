#pragma once

#include "pfl/constitutive.hpp"
#include "pfl/mesh.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <vector>

namespace pfl {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Nodal fields at one time level. Displacement-type vectors are interleaved
/// (u_x0, u_y0, u_x1, ...).
struct FieldState {
    Vector u, v, acc;
    Vector phi;
    Vector fat;
    double t = 0.0;

    static FieldState zeros(std::size_t num_nodes);
    bool consistent_with(std::size_t num_nodes) const;
};

/// Global operators of the semi-discrete system, all with positive-definite
/// sign convention:
///   M acc = -K_u u - K_v v + w_a
///   M_phi dphi/dt = (P_phi + K_c) phi + w_b + w_c
///   M_fat dF/dt = w_d
struct GlobalOperators {
    SparseMatrix M, M_phi, M_fat;
    SparseMatrix K_u, K_v;
    SparseMatrix P_phi, K_c;
    Vector w_a, w_b, w_c, w_d;
};

/// Per-element constants of a linear triangle.
struct ElementGeometry {
    double area = 0.0;
    // Shape-function gradients, row i = (dN_i/dx, dN_i/dy).
    Eigen::Matrix<double, 3, 2> grad;
    // Strain-displacement matrix for interleaved dofs.
    Eigen::Matrix<double, 3, 6> B;
};

/// Row-sum lumping switches. Lumping the damage mass (and the reaction terms
/// that share it) gives an M-matrix damage system on non-obtuse meshes.
struct MassLumping {
    bool damage = true;
    bool fatigue = true;
};

/// Precomputed discretisation of the coupled displacement/damage/fatigue system
/// on one mesh. Sparsity patterns are fixed at construction; assembly writes
/// straight into the value arrays.
class PhaseFieldModel {
public:
    PhaseFieldModel(const Mesh& mesh, const MaterialParams& params, MassLumping lumping = {});

    const Mesh& mesh() const { return *mesh_; }
    const MaterialParams& params() const { return params_; }
    const Matrix3& elasticity() const { return C_; }
    std::size_t num_nodes() const { return mesh_->num_nodes(); }
    const ElementGeometry& element(std::size_t e) const { return geom_[e]; }

    GlobalOperators assemble(const FieldState& state) const;

    // Pieces of assemble() that the time stepper refreshes individually.
    SparseMatrix degraded_stiffness(const Vector& phi) const;
    Vector damage_gradient_load(const Vector& phi) const;
    Vector fatigue_load(const FieldState& state) const;
    /// Damage system pieces: P_phi, K_c, w_b, w_c from state.
    void assemble_damage(const FieldState& state, GlobalOperators& ops) const;

    const SparseMatrix& mass() const { return M_; }
    const SparseMatrix& damage_mass() const { return M_phi_; }
    const SparseMatrix& fatigue_mass() const { return M_fat_; }
    const SparseMatrix& viscous() const { return K_v_; }
    const SparseMatrix& elastic_stiffness() const { return K0_; }

    Voigt element_strain(std::size_t e, const Vector& u) const;
    double element_mean(std::size_t e, const Vector& nodal) const;

    /// Integrated free energy per unit thickness.
    double free_energy(const FieldState& state) const;

    /// Internal force u-part (K_u u + K_v v - w_a) at the current state.
    Vector internal_force(const SparseMatrix& K_u, const Vector& u, const Vector& v, const Vector& w_a) const;

private:
    const Mesh* mesh_;
    MaterialParams params_;
    Matrix3 C_;
    MassLumping lumping_;
    std::vector<ElementGeometry> geom_;

    // Unit-coefficient element matrices shared by all operators.
    std::vector<Eigen::Matrix<double, 6, 6>> Ke_;  // h A B^T C B
    std::vector<Eigen::Matrix<double, 6, 6>> Kve_; // h A B^T Dv B
    std::vector<Eigen::Matrix3d> Le_;              // h A G G^T

    // Position of each element entry inside the compressed value arrays.
    std::vector<std::array<int, 36>> vec_slots_;
    std::vector<std::array<int, 9>> sca_slots_;

    SparseMatrix vec_pattern_, sca_pattern_;
    SparseMatrix M_, M_phi_, M_fat_, K_v_, K0_;

    /// Scalar mass of element e (thickness included), lumped or consistent.
    Eigen::Matrix3d damage_element_mass(std::size_t e) const;

    template <int N>
    void scatter(SparseMatrix& target, std::size_t e, const Eigen::Matrix<double, N, N>& local) const;
};

/// Consistent mass of a linear triangle for unit density/thickness.
Eigen::Matrix3d triangle_mass(double area);

} // namespace pfl
