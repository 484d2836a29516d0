#pragma once

#include <array>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mpes/physics.hpp"

namespace mpes {

/// One time sample of every monitored quantity. Keys are fixed; see
/// norm_report_keys() for the list and their meaning.
struct NormReport {
    double t = 0.0;
    std::map<std::string, double> values;

    /// Throws std::out_of_range for an unknown key.
    double at(const std::string& key) const { return values.at(key); }
};

/// Every key written by norm_report, in output order.
const std::vector<std::string>& norm_report_keys();

/// Computes the full report. `forcing` may be null (zero forcing).
NormReport norm_report(const State& s, const Model& model, const FieldSet* forcing = nullptr);

/// One energy balance dE/dt = -diss_h - diss_p + work + forcing.
struct BudgetComponent {
    double dEdt = 0.0;
    double diss_h = 0.0;
    double diss_p = 0.0;
    double work = 0.0;     // pressure work -<v, grad Phi> (v only)
    double coupling = 0.0; // int R T omega / p (v only, reported)
    double coriolis = 0.0; // reported; taken as zero in the balance
    double forcing = 0.0;
    double residual = 0.0;
    double max_term = 0.0;
};

struct BudgetSample {
    double t = 0.0;
    BudgetComponent v, theta, q;
};

/// Centered-difference budgets at every interior sample. Requires at least
/// three samples at uniform spacing (ParameterError otherwise).
std::vector<BudgetSample> energy_budget(const std::vector<NormReport>& series);

struct GronwallSample {
    double t = 0.0;
    // Order: v_p in H1, theta_p in H1, Delta v, Delta theta.
    std::array<double, 4> lhs{};
    std::array<double, 4> rhs{};
};

inline const std::array<const char*, 4> gronwall_names = {"vp_H1", "thetap_H1", "lap_v",
                                                          "lap_theta"};

/// LHS (centered time derivative plus dissipation) and RHS (bracketed
/// combination with C = 1) of the four differential inequalities.
std::vector<GronwallSample> gronwall_series(const std::vector<NormReport>& series,
                                            const PhysParams& params);

/// int_{M'} (int f dp)(int g h dp) dx dy by grid quadrature.
double trilinear_form(const Field3D& f, const Field3D& g, const Field3D& h);
/// ||f||^(1/2) (||f||^(1/2) + ||grad f||^(1/2)) ||g|| ||h||^(1/2) (||h||^(1/2) + ||grad h||^(1/2)).
double trilinear_bound(const Field3D& f, const Field3D& g, const Field3D& h);

/// lhs = ||omega||_{L2(M)}; rhs = sqrt(Lp) * int ||div v(., p)||_{L2(M')} dp.
std::pair<double, double> minkowski_probe(const Field3D& v1, const Field3D& v2);

/// int_M (v . grad s + omega d_p s) s dM for the model's advection operator.
double advection_skew_residual(const Model& model, const Field3D& v1, const Field3D& v2,
                               const Field3D& s);

} // namespace mpes
