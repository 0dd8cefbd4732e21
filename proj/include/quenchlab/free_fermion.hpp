#pragma once

#include <stdexcept>
#include <vector>

namespace quenchlab {

struct SingularModeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Positive half of the antiperiodic (Neveu-Schwarz) Brillouin zone,
// q_n = (2n+1)pi/L for n = 0 .. L/2-1.
struct MomentumGrid {
    int L = 0;
    std::vector<double> momenta;
};

MomentumGrid momentum_grid(int L);

// Full antiperiodic zone, L momenta covering +-q.
std::vector<double> full_zone_momenta(int L);

double dispersion(double B, double J, double q);

// Time-averaged nearest-neighbor correlator after a quench from the fully
// x-polarized state. The polarized state weighs both fermion parity sectors
// equally, so the finite-L value is the mean of the antiperiodic-sector sum
// and the periodic-sector sum (the latter carries a 2/L constant from the
// unpaired q=0 and q=pi modes).
double g_av_exact(double B, double J, int L, double t);

// Instantaneous correlator G(t) on the same footing (cos instead of j0).
double g_exact(double B, double J, int L, double t);

// Stationary (first) term of the time-averaged sum on the antiperiodic grid.
double g_av_stationary(double B, double J, int L);

// Stationary value in the thermodynamic limit: 1 - B^2/(2J^2) below J, 1/2 above.
double g_inf(double B, double J);

// GGE prediction on an explicit momentum grid with per-mode occupations.
double gge_correlator_on(const std::vector<double>& momenta, const std::vector<double>& occupations,
                         double B, double J);

// Same, on the full antiperiodic zone for size L (1/L prefactor).
double gge_correlator(double B, double J, int L, const std::vector<double>& occupations);

std::vector<double> polarized_occupations(double B, double J, const std::vector<double>& momenta);
std::vector<double> thermal_occupations(double B, double J, double beta, const std::vector<double>& momenta);

// Analytic d/dB of g_av_exact, term-wise chain rule through omega_q and j0.
double dgdb_exact(double B, double J, int L, double t);

double scaling_function_reference(double epsilon_t);

}  // namespace quenchlab
