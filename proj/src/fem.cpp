#include "pfl/fem.hpp"

#include "pfl/errors.hpp"

#include <algorithm>
#include <cmath>

namespace pfl {

FieldState FieldState::zeros(std::size_t num_nodes)
{
    FieldState s;
    const auto n = static_cast<Eigen::Index>(num_nodes);
    s.u = Vector::Zero(2 * n);
    s.v = Vector::Zero(2 * n);
    s.acc = Vector::Zero(2 * n);
    s.phi = Vector::Zero(n);
    s.fat = Vector::Zero(n);
    return s;
}

bool FieldState::consistent_with(std::size_t num_nodes) const
{
    const auto n = static_cast<Eigen::Index>(num_nodes);
    return u.size() == 2 * n && v.size() == 2 * n && acc.size() == 2 * n && phi.size() == n && fat.size() == n;
}

Eigen::Matrix3d triangle_mass(double area)
{
    Eigen::Matrix3d m;
    m << 2, 1, 1,
         1, 2, 1,
         1, 1, 2;
    return m * (area / 12.0);
}

namespace {

int find_slot(const SparseMatrix& pattern, int row, int col)
{
    const int* inner = pattern.innerIndexPtr();
    const int begin = pattern.outerIndexPtr()[col];
    const int end = pattern.outerIndexPtr()[col + 1];
    const int* it = std::lower_bound(inner + begin, inner + end, row);
    return static_cast<int>(it - inner);
}

SparseMatrix make_pattern(Eigen::Index n, const std::vector<std::vector<int>>& element_dofs)
{
    std::vector<Eigen::Triplet<double>> trips;
    for (const auto& dofs : element_dofs)
        for (int r : dofs)
            for (int c : dofs)
                trips.emplace_back(r, c, 0.0);
    SparseMatrix m(n, n);
    m.setFromTriplets(trips.begin(), trips.end());
    m.makeCompressed();
    return m;
}

} // namespace

PhaseFieldModel::PhaseFieldModel(const Mesh& mesh, const MaterialParams& params, MassLumping lumping)
    : mesh_(&mesh), params_(params), C_(elasticity_tensor(params.E, params.nu)), lumping_(lumping)
{
    params_.validate();
    const std::size_t ne = mesh.num_elements();
    const auto nn = static_cast<Eigen::Index>(mesh.num_nodes());
    const double h = params_.h;

    geom_.resize(ne);
    Ke_.resize(ne);
    Kve_.resize(ne);
    Le_.resize(ne);
    Matrix3 Dv = Matrix3::Zero();
    Dv(0, 0) = params_.b;
    Dv(1, 1) = params_.b;
    Dv(2, 2) = 0.5 * params_.b;

    std::vector<std::vector<int>> vec_dofs(ne), sca_dofs(ne);
    for (std::size_t e = 0; e < ne; ++e) {
        const auto& el = mesh.elements[e];
        const Point2& p0 = mesh.nodes[el[0]];
        const Point2& p1 = mesh.nodes[el[1]];
        const Point2& p2 = mesh.nodes[el[2]];
        const double two_a = (p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y);
        if (!(two_a > 0.0) || !std::isfinite(two_a))
            throw NumericalError("assembly: element " + std::to_string(e) + " has singular geometry");
        ElementGeometry& g = geom_[e];
        g.area = 0.5 * two_a;
        const std::array<const Point2*, 3> p{&p0, &p1, &p2};
        for (int i = 0; i < 3; ++i) {
            const Point2& pj = *p[(i + 1) % 3];
            const Point2& pk = *p[(i + 2) % 3];
            g.grad(i, 0) = (pj.y - pk.y) / two_a;
            g.grad(i, 1) = (pk.x - pj.x) / two_a;
        }
        g.B.setZero();
        for (int i = 0; i < 3; ++i) {
            g.B(0, 2 * i) = g.grad(i, 0);
            g.B(1, 2 * i + 1) = g.grad(i, 1);
            g.B(2, 2 * i) = g.grad(i, 1);
            g.B(2, 2 * i + 1) = g.grad(i, 0);
        }
        Ke_[e] = h * g.area * g.B.transpose() * C_ * g.B;
        Kve_[e] = h * g.area * g.B.transpose() * Dv * g.B;
        Le_[e] = h * g.area * g.grad * g.grad.transpose();

        for (int i = 0; i < 3; ++i) {
            sca_dofs[e].push_back(el[i]);
            vec_dofs[e].push_back(2 * el[i]);
            vec_dofs[e].push_back(2 * el[i] + 1);
        }
    }

    vec_pattern_ = make_pattern(2 * nn, vec_dofs);
    sca_pattern_ = make_pattern(nn, sca_dofs);
    vec_slots_.resize(ne);
    sca_slots_.resize(ne);
    for (std::size_t e = 0; e < ne; ++e) {
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j)
                vec_slots_[e][i * 6 + j] = find_slot(vec_pattern_, vec_dofs[e][i], vec_dofs[e][j]);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                sca_slots_[e][i * 3 + j] = find_slot(sca_pattern_, sca_dofs[e][i], sca_dofs[e][j]);
    }

    M_ = vec_pattern_;
    K_v_ = vec_pattern_;
    K0_ = vec_pattern_;
    M_phi_ = sca_pattern_;
    for (std::size_t e = 0; e < ne; ++e) {
        const Eigen::Matrix3d m3 = h * triangle_mass(geom_[e].area);
        Eigen::Matrix<double, 6, 6> m6 = Eigen::Matrix<double, 6, 6>::Zero();
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                m6(2 * i, 2 * j) = params_.rho * m3(i, j);
                m6(2 * i + 1, 2 * j + 1) = params_.rho * m3(i, j);
            }
        scatter<6>(M_, e, m6);
        scatter<6>(K_v_, e, Kve_[e]);
        scatter<6>(K0_, e, Ke_[e]);
        scatter<3>(M_phi_, e, damage_element_mass(e));
    }
    if (lumping_.fatigue) {
        std::vector<Eigen::Triplet<double>> diag;
        const Vector rows = M_phi_ * Vector::Ones(nn);
        for (Eigen::Index i = 0; i < nn; ++i)
            diag.emplace_back(i, i, rows(i));
        M_fat_.resize(nn, nn);
        M_fat_.setFromTriplets(diag.begin(), diag.end());
        M_fat_.makeCompressed();
    } else {
        M_fat_ = sca_pattern_;
        for (std::size_t e = 0; e < ne; ++e)
            scatter<3>(M_fat_, e, Eigen::Matrix3d(h * triangle_mass(geom_[e].area)));
    }
}

Eigen::Matrix3d PhaseFieldModel::damage_element_mass(std::size_t e) const
{
    const double area = geom_[e].area;
    if (lumping_.damage)
        return Eigen::Matrix3d::Identity() * (params_.h * area / 3.0);
    return params_.h * triangle_mass(area);
}

template <int N>
void PhaseFieldModel::scatter(SparseMatrix& target, std::size_t e, const Eigen::Matrix<double, N, N>& local) const
{
    double* values = target.valuePtr();
    if constexpr (N == 6) {
        for (int i = 0; i < 36; ++i)
            values[vec_slots_[e][i]] += local(i / 6, i % 6);
    } else {
        for (int i = 0; i < 9; ++i)
            values[sca_slots_[e][i]] += local(i / 3, i % 3);
    }
}

Voigt PhaseFieldModel::element_strain(std::size_t e, const Vector& u) const
{
    const auto& el = mesh_->elements[e];
    Eigen::Matrix<double, 6, 1> ue;
    for (int i = 0; i < 3; ++i) {
        ue(2 * i) = u(2 * el[i]);
        ue(2 * i + 1) = u(2 * el[i] + 1);
    }
    return geom_[e].B * ue;
}

double PhaseFieldModel::element_mean(std::size_t e, const Vector& nodal) const
{
    const auto& el = mesh_->elements[e];
    return (nodal(el[0]) + nodal(el[1]) + nodal(el[2])) / 3.0;
}

SparseMatrix PhaseFieldModel::degraded_stiffness(const Vector& phi) const
{
    SparseMatrix K = vec_pattern_;
    for (std::size_t e = 0; e < geom_.size(); ++e)
        scatter<6>(K, e, degradation(element_mean(e, phi)) * Ke_[e]);
    return K;
}

Vector PhaseFieldModel::damage_gradient_load(const Vector& phi) const
{
    Vector w = Vector::Zero(2 * static_cast<Eigen::Index>(num_nodes()));
    const double coef = params_.gamma * params_.gc * params_.h;
    for (std::size_t e = 0; e < geom_.size(); ++e) {
        const auto& el = mesh_->elements[e];
        const ElementGeometry& g = geom_[e];
        const Eigen::Vector3d pe(phi(el[0]), phi(el[1]), phi(el[2]));
        const Eigen::Vector2d dphi = g.grad.transpose() * pe;
        for (int i = 0; i < 3; ++i) {
            const double proj = dphi.dot(g.grad.row(i).transpose());
            w(2 * el[i]) += coef * g.area * dphi(0) * proj;
            w(2 * el[i] + 1) += coef * g.area * dphi(1) * proj;
        }
    }
    return w;
}

void PhaseFieldModel::assemble_damage(const FieldState& state, GlobalOperators& ops) const
{
    const auto nn = static_cast<Eigen::Index>(num_nodes());
    const MaterialParams& p = params_;
    ops.P_phi = sca_pattern_;
    ops.K_c = sca_pattern_;
    ops.w_b = Vector::Zero(nn);
    ops.w_c = Vector::Zero(nn);
    for (std::size_t e = 0; e < geom_.size(); ++e) {
        const auto& el = mesh_->elements[e];
        const ElementGeometry& g = geom_[e];
        const double lam_inv = inverse_lambda(element_mean(e, state.phi), p.c, p.delta, p.sigma_exp);
        const Voigt eps = element_strain(e, state.u);
        const double energy = eps.dot(C_ * eps);
        const Eigen::Matrix3d m3 = damage_element_mass(e);

        scatter<3>(ops.P_phi, e, Eigen::Matrix3d(-lam_inv * (p.gamma * p.gc * Le_[e] + (p.gc / p.gamma) * m3)));
        scatter<3>(ops.K_c, e, Eigen::Matrix3d(-lam_inv * energy * m3));

        Eigen::Vector3d fat_term, pot_corr;
        for (int i = 0; i < 3; ++i) {
            const double ph = state.phi(el[i]);
            fat_term(i) = state.fat(el[i]) * potential_Hf_prime(ph);
            // H' is linear (= phi) inside [0, 1]; outside, its difference from
            // phi is carried explicitly.
            pot_corr(i) = potential_H_prime(ph, p.delta) - ph;
        }
        const Eigen::Vector3d wc = -(lam_inv / p.gamma) * (m3 * fat_term) - lam_inv * (p.gc / p.gamma) * (m3 * pot_corr);
        const double wb = lam_inv * energy * p.h * g.area / 3.0;
        for (int i = 0; i < 3; ++i) {
            ops.w_b(el[i]) += wb;
            ops.w_c(el[i]) += wc(i);
        }
    }
}

Vector PhaseFieldModel::fatigue_load(const FieldState& state) const
{
    const auto nn = static_cast<Eigen::Index>(num_nodes());
    Vector w = Vector::Zero(nn);
    const MaterialParams& p = params_;
    for (std::size_t e = 0; e < geom_.size(); ++e) {
        const auto& el = mesh_->elements[e];
        const Voigt eps = element_strain(e, state.u);
        const Voigt rate = element_strain(e, state.v);
        const double fhat = fatigue_source_fhat(eps, rate, element_mean(e, state.phi), C_, p.a, p.b);
        if (fhat == 0.0)
            continue;
        Eigen::Vector3d q;
        for (int i = 0; i < 3; ++i)
            q(i) = -potential_Hf(state.phi(el[i]));
        const Eigen::Vector3d we = (fhat / p.gamma) * (p.h * triangle_mass(geom_[e].area) * q);
        for (int i = 0; i < 3; ++i)
            w(el[i]) += we(i);
    }
    return w;
}

GlobalOperators PhaseFieldModel::assemble(const FieldState& state) const
{
    if (!state.consistent_with(num_nodes()))
        throw DataError("assemble: field state does not match the mesh");
    GlobalOperators ops;
    ops.M = M_;
    ops.M_phi = M_phi_;
    ops.M_fat = M_fat_;
    ops.K_v = K_v_;
    ops.K_u = degraded_stiffness(state.phi);
    ops.w_a = damage_gradient_load(state.phi);
    assemble_damage(state, ops);
    ops.w_d = fatigue_load(state);
    return ops;
}

double PhaseFieldModel::free_energy(const FieldState& state) const
{
    const MaterialParams& p = params_;
    double total = 0.0;
    for (std::size_t e = 0; e < geom_.size(); ++e) {
        const auto& el = mesh_->elements[e];
        const ElementGeometry& g = geom_[e];
        const double phi = element_mean(e, state.phi);
        const double fat = element_mean(e, state.fat);
        const Voigt eps = element_strain(e, state.u);
        const Eigen::Vector3d pe(state.phi(el[0]), state.phi(el[1]), state.phi(el[2]));
        const Eigen::Vector2d dphi = g.grad.transpose() * pe;
        const double elastic = 0.5 * degradation(phi) * eps.dot(C_ * eps);
        const double surface = 0.5 * p.gc * p.gamma * dphi.squaredNorm();
        const double bulk = (p.gc * potential_H(phi, p.delta) + fat * potential_Hf(phi)) / p.gamma;
        total += g.area * (elastic + surface + bulk);
    }
    return total;
}

Vector PhaseFieldModel::internal_force(const SparseMatrix& K_u, const Vector& u, const Vector& v,
                                       const Vector& w_a) const
{
    return K_u * u + K_v_ * v - w_a;
}

} // namespace pfl
