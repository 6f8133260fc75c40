#pragma once

// Spatial model: PPP base stations plus Poisson-cluster-process users.
//
// All lengths share one unit and all densities use its inverse square
// (the CLI uses km and km^-2). The analytic routines rescale to lambda_b = 1
// on entry via NetworkModel::normalized().

#include <variant>

namespace cellload {

/// Thomas cluster: offspring displaced by an isotropic Gaussian of per-axis
/// standard deviation sigma.
struct Thomas {
    double sigma;
    bool operator==(const Thomas&) const = default;
};

/// Matern cluster: offspring uniform in a disc of the given radius around the parent.
struct Matern {
    double radius;
    bool operator==(const Matern&) const = default;
};

using ClusterKind = std::variant<Thomas, Matern>;

struct UserModel {
    double lambda_p;  ///< parent density
    double m_bar;     ///< mean offspring per parent (Poisson)
    ClusterKind kind;

    /// Throws ValidationError naming the bad field ("lambda_p", "mbar", "sigma", "cluster_radius").
    /// m_bar = 0 is accepted as the degenerate empty process.
    void validate() const;

    double lambda_u() const { return m_bar * lambda_p; }

    bool is_thomas() const { return std::holds_alternative<Thomas>(kind); }
    /// sigma for Thomas, radius for Matern.
    double cluster_scale() const;

    bool operator==(const UserModel&) const = default;
};

struct NetworkModel {
    double lambda_b;
    UserModel users;

    void validate() const;

    /// Same model in units where lambda_b = 1 (lengths times sqrt(lambda_b)).
    NetworkModel normalized() const;

    bool operator==(const NetworkModel&) const = default;
};

/// f_d(x | z): density of the distance from the origin of an offspring whose
/// parent is at distance z. Rician for Thomas, chi^(1)/chi^(2) for Matern.
double conditional_distance_pdf(const UserModel& model, double x, double z);

/// \int_0^r f_d(u | v) du: probability that an offspring of a parent at
/// distance v lands inside b(o, r). Thomas uses 1 - Q1(v/sigma, r/sigma);
/// Matern uses the squared-min term plus a quadrature of the arccos term.
double cluster_cdf(const UserModel& model, double r, double v);

/// Second-order product density rho^(2)(r) of the user process.
double pair_correlation_density(const UserModel& model, double r);

/// rho^(2)(r) - lambda_u^2, the clustering excess.
double pair_correlation_excess(const UserModel& model, double r);

/// Distance beyond which an offspring is treated as absent from its parent
/// when sampling: 6 sigma (Thomas) or the disc radius (Matern).
double cluster_truncation_radius(const UserModel& model);

}  // namespace cellload
