#include "quenchlab/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "quenchlab/free_fermion.hpp"

namespace quenchlab {

namespace {

double interp(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t hi = static_cast<std::size_t>(it - xs.begin());
    const std::size_t lo = hi - 1;
    const double f = (x - xs[lo]) / (xs[hi] - xs[lo]);
    return ys[lo] + f * (ys[hi] - ys[lo]);
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size()));
}

struct CollapseEval {
    double residual = std::numeric_limits<double>::infinity();
    double c = 0.0;
    bool valid = false;
};

// residual of the shared-c/t collapse at candidate b_c, per point
CollapseEval evaluate_candidate(const DerivativeCurveSet& curves, double b_c, double x_window) {
    const auto& ts = curves.times;
    const auto& bs = curves.b_grid;
    double xlo = -x_window;
    double xhi = x_window;
    for (double t : ts) {
        xlo = std::max(xlo, (bs.front() - b_c) * t);
        xhi = std::min(xhi, (bs.back() - b_c) * t);
    }
    CollapseEval out;
    if (xhi <= xlo) return out;

    constexpr int kPoints = 81;
    const std::size_t nt = ts.size();
    std::vector<double> zs(nt);
    double zmean = 0.0;
    for (std::size_t i = 0; i < nt; ++i) zmean += 1.0 / ts[i];
    zmean /= static_cast<double>(nt);
    double zz = 0.0;
    for (std::size_t i = 0; i < nt; ++i) {
        zs[i] = 1.0 / ts[i] - zmean;
        zz += zs[i] * zs[i];
    }

    std::vector<std::vector<double>> Y(nt, std::vector<double>(kPoints));
    for (int k = 0; k < kPoints; ++k) {
        const double x = xlo + (xhi - xlo) * k / (kPoints - 1);
        for (std::size_t i = 0; i < nt; ++i)
            Y[i][k] = interp(bs, curves.values[i], x / ts[i] + b_c);
    }

    double cnum = 0.0;
    std::vector<double> ybar(kPoints, 0.0);
    for (int k = 0; k < kPoints; ++k) {
        for (std::size_t i = 0; i < nt; ++i) ybar[k] += Y[i][k];
        ybar[k] /= static_cast<double>(nt);
        for (std::size_t i = 0; i < nt; ++i) cnum += zs[i] * (Y[i][k] - ybar[k]);
    }
    const double c = (zz > 0.0) ? cnum / (kPoints * zz) : 0.0;

    double r = 0.0;
    for (int k = 0; k < kPoints; ++k) {
        for (std::size_t i = 0; i < nt; ++i) {
            const double d = Y[i][k] - ybar[k] - c * zs[i];
            r += d * d;
        }
    }
    out.residual = r / static_cast<double>(nt * kPoints);
    out.c = c;
    out.valid = true;
    return out;
}

struct GridScan {
    double best_b = 0.0;
    CollapseEval best;
    std::vector<double> grid;
    std::vector<double> residuals;
};

GridScan scan(const DerivativeCurveSet& curves, double lo, double hi, int n, double x_window) {
    GridScan out;
    out.grid.resize(n);
    out.residuals.resize(n);
    for (int i = 0; i < n; ++i) {
        const double b = lo + (hi - lo) * i / (n - 1);
        const CollapseEval e = evaluate_candidate(curves, b, x_window);
        out.grid[i] = b;
        out.residuals[i] = e.residual;
        if (e.valid && e.residual < out.best.residual) {
            out.best = e;
            out.best_b = b;
        }
    }
    return out;
}

}  // namespace

std::string method_name(EstimateMethod m) {
    switch (m) {
        case EstimateMethod::PairwiseCrossing: return "crossing";
        case EstimateMethod::CollapseFit: return "collapse";
        case EstimateMethod::BinderCrossing: return "binder";
        case EstimateMethod::MeanField: return "meanfield";
    }
    return "unknown";
}

void DerivativeCurveSet::validate() const {
    if (times.size() < 2) throw std::invalid_argument("need at least two times");
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] <= 0.0) throw std::invalid_argument("times must be positive");
        if (i && times[i] <= times[i - 1])
            throw std::invalid_argument("times must be strictly increasing");
    }
    if (b_grid.size() < 5) throw std::invalid_argument("need at least five B grid points");
    for (std::size_t i = 1; i < b_grid.size(); ++i)
        if (b_grid[i] <= b_grid[i - 1])
            throw std::invalid_argument("b_grid must be strictly increasing");
    if (values.size() != times.size()) throw std::invalid_argument("values/time shape mismatch");
    for (const auto& row : values)
        if (row.size() != b_grid.size()) throw std::invalid_argument("values/B shape mismatch");
}

DerivativeCurveSet derivative_curves(const GavSweep& sweep, double delta_b) {
    if (delta_b <= 0.0) throw std::invalid_argument("delta_b must be positive");
    if (sweep.plus.size() != sweep.b_grid.size() || sweep.minus.size() != sweep.b_grid.size())
        throw std::invalid_argument("sweep shape mismatch");
    DerivativeCurveSet out;
    out.times = sweep.times;
    out.b_grid = sweep.b_grid;
    out.source = CurveSource::Statevector;
    out.values.assign(sweep.times.size(), std::vector<double>(sweep.b_grid.size()));
    for (std::size_t bi = 0; bi < sweep.b_grid.size(); ++bi) {
        if (sweep.plus[bi].size() != sweep.times.size() ||
            sweep.minus[bi].size() != sweep.times.size())
            throw std::invalid_argument("sweep shape mismatch");
        for (std::size_t ti = 0; ti < sweep.times.size(); ++ti)
            out.values[ti][bi] = (sweep.plus[bi][ti] - sweep.minus[bi][ti]) / (2.0 * delta_b);
    }
    out.validate();
    return out;
}

DerivativeCurveSet derivative_curves_exact(double J, int L, const std::vector<double>& times,
                                           const std::vector<double>& b_grid) {
    DerivativeCurveSet out;
    out.times = times;
    out.b_grid = b_grid;
    out.source = CurveSource::Exact;
    out.values.assign(times.size(), std::vector<double>(b_grid.size()));
    for (std::size_t ti = 0; ti < times.size(); ++ti)
        for (std::size_t bi = 0; bi < b_grid.size(); ++bi)
            out.values[ti][bi] = dgdb_exact(b_grid[bi], J, L, times[ti]);
    out.validate();
    return out;
}

CrossingResult find_crossing(const DerivativeCurveSet& curves) {
    curves.validate();
    const auto& ts = curves.times;
    const auto& bs = curves.b_grid;
    const std::size_t nt = ts.size();
    const std::size_t nb = bs.size();

    // consensus point: B with the smallest spread across times
    std::size_t consensus = 0;
    double best_spread = std::numeric_limits<double>::infinity();
    for (std::size_t bi = 0; bi < nb; ++bi) {
        std::vector<double> col(nt);
        for (std::size_t ti = 0; ti < nt; ++ti) col[ti] = curves.values[ti][bi];
        const double spread = std_of(col);
        if (spread < best_spread) {
            best_spread = spread;
            consensus = bi;
        }
    }
    const double b_star = bs[consensus];

    std::vector<double> roots;
    std::vector<double> root_values;
    std::vector<double> d(nb);
    for (std::size_t i = 0; i < nt; ++i) {
        for (std::size_t j = i + 1; j < nt; ++j) {
            for (std::size_t k = 0; k < nb; ++k)
                d[k] = curves.values[i][k] - curves.values[j][k];

            // candidate roots: exact zero runs crossed transversally, plus
            // strict sign-change brackets
            double best_dist = std::numeric_limits<double>::infinity();
            double point_root = 0.0;
            bool have_point = false;
            double bracket_lo = 0.0;
            double bracket_hi = 0.0;
            bool have_bracket = false;
            for (std::size_t k = 0; k < nb;) {
                if (d[k] != 0.0) {
                    ++k;
                    continue;
                }
                std::size_t k1 = k;
                while (k1 + 1 < nb && d[k1 + 1] == 0.0) ++k1;
                if (k > 0 && k1 + 1 < nb && d[k - 1] * d[k1 + 1] < 0.0) {
                    const double root = 0.5 * (bs[k] + bs[k1]);
                    const double dist = std::abs(root - b_star);
                    if (dist < best_dist) {
                        best_dist = dist;
                        point_root = root;
                        have_point = true;
                    }
                }
                k = k1 + 1;
            }
            for (std::size_t k = 0; k + 1 < nb; ++k) {
                if (d[k] * d[k + 1] >= 0.0) continue;
                const double mid = 0.5 * (bs[k] + bs[k + 1]);
                const double dist = std::abs(mid - b_star);
                if (dist < best_dist) {
                    best_dist = dist;
                    bracket_lo = bs[k];
                    bracket_hi = bs[k + 1];
                    have_point = false;
                    have_bracket = true;
                }
            }
            if (!have_point && !have_bracket)
                throw NoCrossingError("no crossing between times " + std::to_string(ts[i]) +
                                      " and " + std::to_string(ts[j]));

            double root = point_root;
            if (!have_point) {
                auto diff = [&](double b) {
                    return interp(bs, curves.values[i], b) - interp(bs, curves.values[j], b);
                };
                double lo = bracket_lo;
                double hi = bracket_hi;
                double flo = diff(lo);
                for (int it = 0; it < 100 && hi - lo > 1e-14; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    const double fmid = diff(mid);
                    if (fmid == 0.0) {
                        lo = hi = mid;
                    } else if ((flo < 0.0) == (fmid < 0.0)) {
                        lo = mid;
                        flo = fmid;
                    } else {
                        hi = mid;
                    }
                }
                root = 0.5 * (lo + hi);
            }
            roots.push_back(root);
            root_values.push_back(0.5 * (interp(bs, curves.values[i], root) +
                                         interp(bs, curves.values[j], root)));
        }
    }

    CrossingResult result;
    result.estimate.b_c = mean_of(roots);
    result.estimate.uncertainty = std_of(roots);
    result.estimate.method = EstimateMethod::PairwiseCrossing;
    result.estimate.residual = 0.0;
    result.crossing_value = mean_of(root_values);
    result.crossing_value_std = std_of(root_values);
    return result;
}

CollapseResult collapse_fit(const DerivativeCurveSet& curves, double b_lo, double b_hi,
                            double x_window) {
    curves.validate();
    if (curves.times.size() < 3) throw std::invalid_argument("collapse needs at least three times");
    if (!(b_lo < b_hi)) throw std::invalid_argument("need b_lo < b_hi");
    if (x_window <= 0.0) throw std::invalid_argument("x_window must be positive");

    constexpr int kCoarse = 41;
    const GridScan coarse = scan(curves, b_lo, b_hi, kCoarse, x_window);
    if (!coarse.best.valid)
        throw EmptyOverlapError("rescaled curves share no x support on the candidate interval");

    const double step = (b_hi - b_lo) / (kCoarse - 1);
    const double rlo = std::max(b_lo, coarse.best_b - 2.0 * step);
    const double rhi = std::min(b_hi, coarse.best_b + 2.0 * step);
    const GridScan fine = scan(curves, rlo, rhi, 81, x_window);
    if (!fine.best.valid)
        throw EmptyOverlapError("rescaled curves share no x support on the refinement interval");

    // uncertainty: half-width of the contiguous refined interval with
    // residual <= 2x the minimum
    std::size_t imin = 0;
    for (std::size_t i = 1; i < fine.grid.size(); ++i)
        if (fine.residuals[i] < fine.residuals[imin]) imin = i;
    std::size_t ilo = imin;
    std::size_t ihi = imin;
    const double cutoff = 2.0 * fine.best.residual;
    while (ilo > 0 && fine.residuals[ilo - 1] <= cutoff) --ilo;
    while (ihi + 1 < fine.grid.size() && fine.residuals[ihi + 1] <= cutoff) ++ihi;
    const double uncertainty = 0.5 * (fine.grid[ihi] - fine.grid[ilo]);

    CollapseResult result;
    result.estimate.b_c = fine.best_b;
    result.estimate.uncertainty = uncertainty;
    result.estimate.method = EstimateMethod::CollapseFit;
    result.estimate.residual = fine.best.residual;
    result.correction_c = fine.best.c;

    // master curve and a near-origin line fit on the raw pointwise mean
    const double b_c = fine.best_b;
    const auto& ts = curves.times;
    const auto& bs = curves.b_grid;
    double xlo = -x_window;
    double xhi = x_window;
    for (double t : ts) {
        xlo = std::max(xlo, (bs.front() - b_c) * t);
        xhi = std::min(xhi, (bs.back() - b_c) * t);
    }
    constexpr int kPoints = 81;
    result.master_x.resize(kPoints);
    result.master_y.resize(kPoints);
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int nfit = 0;
    for (int k = 0; k < kPoints; ++k) {
        const double x = xlo + (xhi - xlo) * k / (kPoints - 1);
        double y = 0.0;
        for (std::size_t i = 0; i < ts.size(); ++i)
            y += interp(bs, curves.values[i], x / ts[i] + b_c);
        y /= static_cast<double>(ts.size());
        result.master_x[k] = x;
        result.master_y[k] = y;
        if (std::abs(x) <= 0.5 * x_window) {
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            ++nfit;
        }
    }
    if (nfit >= 2) {
        const double denom = nfit * sxx - sx * sx;
        result.slope = (nfit * sxy - sx * sy) / denom;
        result.intercept = (sy - result.slope * sx) / nfit;
    }
    return result;
}

}  // namespace quenchlab
