#pragma once

#include <Eigen/Dense>

namespace pfl {

/// Voigt vectors use engineering shear: [e11, e22, 2 e12].
using Voigt = Eigen::Vector3d;
using Matrix3 = Eigen::Matrix3d;

struct MaterialParams {
    double E = 160e9;          // Pa
    double nu = 0.3;
    double rho = 7800.0;       // kg/m^3
    double b = 1e8;            // viscous damping, N s/m^2
    double a = 5e-7;           // fatigue rate, m^2
    double gamma = 3e-4;       // phase-field layer width, m
    double gc = 2700.0;        // Griffith energy, N/m
    double c = 2e-6;           // damage rate, m/(N s)
    double sigma_exp = 1.0;    // exponent of the damage-rate law
    double delta = 1e-3;       // regularisation of the rate law and potentials
    double h = 5e-3;           // thickness, m

    /// Throws ConfigError when a value is outside its admissible range.
    void validate() const;
};

/// Plane-stress elasticity matrix in Voigt notation.
Matrix3 elasticity_tensor(double E, double nu);

/// g(phi) = (1 - phi)^2
inline double degradation(double phi)
{
    const double s = 1.0 - phi;
    return s * s;
}

// Damage potential H and its derivative: quadratic on [0, 1], linear penalty outside.
double potential_H(double phi, double delta);
double potential_H_prime(double phi, double delta);

// Fatigue potential H_f and its derivative: -phi on [0, 1], saturated outside.
double potential_Hf(double phi);
double potential_Hf_prime(double phi);

/// 1/lambda = c / (1 + delta - phi)^sigma_exp with phi clamped to [0, 1].
double inverse_lambda(double phi, double c, double delta, double sigma_exp);

/// Fatigue source a (1 - phi)_+ |(C E + b D) : D|. Strain and strain rate are
/// Voigt vectors with engineering shear. The (1 - phi) factor is floored at 0.
double fatigue_source_fhat(const Voigt& strain, const Voigt& strain_rate, double phi, const Matrix3& C,
                           double a, double b);

/// Double contraction of two symmetric tensors given as Voigt vectors where
/// `stress` carries tensor shear and `rate` engineering shear.
inline double contract(const Voigt& stress, const Voigt& rate)
{
    return stress(0) * rate(0) + stress(1) * rate(1) + stress(2) * rate(2);
}

/// Viscous "stress" b D expressed with tensor shear from an engineering-shear rate.
inline Voigt viscous_stress(const Voigt& rate, double b)
{
    return Voigt(b * rate(0), b * rate(1), 0.5 * b * rate(2));
}

} // namespace pfl
