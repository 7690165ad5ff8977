#include "pfl/constitutive.hpp"

#include "pfl/errors.hpp"

#include <algorithm>
#include <cmath>

namespace pfl {

void MaterialParams::validate() const
{
    if (!(E > 0 && rho > 0 && gamma > 0 && gc > 0 && c >= 0 && sigma_exp > 0 && h > 0))
        throw ConfigError("material: E, rho, gamma, gc, sigma_exp and h must be positive, c non-negative");
    if (!(nu > 0.0 && nu < 0.5))
        throw ConfigError("material: Poisson ratio must lie in (0, 0.5)");
    if (!(delta > 0))
        throw ConfigError("material: delta must be positive");
    if (!(a >= 0 && b >= 0))
        throw ConfigError("material: a and b must be non-negative");
}

Matrix3 elasticity_tensor(double E, double nu)
{
    if (!(nu < 0.5) || nu <= -1.0)
        throw ConfigError("Poisson ratio out of range for plane stress");
    const double f = E / (1.0 - nu * nu);
    Matrix3 C;
    C << f, f * nu, 0.0,
         f * nu, f, 0.0,
         0.0, 0.0, f * 0.5 * (1.0 - nu);
    return C;
}

double potential_H(double phi, double delta)
{
    if (phi > 1.0)
        return 0.5 + delta * (phi - 1.0);
    if (phi < 0.0)
        return -delta * phi;
    return 0.5 * phi * phi;
}

double potential_H_prime(double phi, double delta)
{
    if (phi > 1.0)
        return delta;
    if (phi < 0.0)
        return -delta;
    return phi;
}

double potential_Hf(double phi)
{
    if (phi > 1.0)
        return -1.0;
    if (phi < 0.0)
        return 0.0;
    return -phi;
}

double potential_Hf_prime(double phi)
{
    return (phi >= 0.0 && phi <= 1.0) ? -1.0 : 0.0;
}

double inverse_lambda(double phi, double c, double delta, double sigma_exp)
{
    const double p = std::clamp(phi, 0.0, 1.0);
    return c / std::pow(1.0 + delta - p, sigma_exp);
}

double fatigue_source_fhat(const Voigt& strain, const Voigt& strain_rate, double phi, const Matrix3& C,
                           double a, double b)
{
    const Voigt stress = C * strain + viscous_stress(strain_rate, b);
    return a * std::max(0.0, 1.0 - phi) * std::abs(contract(stress, strain_rate));
}

} // namespace pfl
