#pragma once

#include <array>
#include <complex>
#include <functional>
#include <vector>

#include "quantsurf/linalg.hpp"
#include "quantsurf/rational.hpp"

namespace quantsurf::flatmodel {

using Complex = std::complex<double>;

/// Transversal profile of one quadrant section; invariants require it to
/// be Taylor flat at 0 for gluing across the axes.
using Profile = std::function<Complex(double)>;

struct HBPoint {
    double h;     // product coordinate x*y
    double beta;  // (1/2) log|x/y|
};

/// Quadrant numbering: 1 (+,+), 2 (-,+), 3 (-,-), 4 (+,-).
int quadrant_of(double x, double y);

HBPoint hb_coords(double x, double y);
std::array<double, 2> hb_inverse(const HBPoint& p, int quadrant);

struct LocalFlatSection {
    std::array<Profile, 4> a;  // one transversal profile per quadrant

    static LocalFlatSection uniform(Profile p) {
        LocalFlatSection s;
        s.a = {p, p, p, p};
        return s;
    }
};

/// Section value at (x, y); zero on the axes.
Complex flat_section_eval(const LocalFlatSection& s, double x, double y);

/// Finite-difference residual of the leafwise-flatness equation
/// Y(sigma) + i x y sigma = 0 with Y = x d/dx - y d/dy, at an off-axis
/// point.  For sections made of smooth profiles the residual is O(step^2).
using Section = std::function<Complex(double, double)>;
double flat_pde_residual(const Section& sigma, double x, double y, double step);
double flat_pde_residual(const LocalFlatSection& s, double x, double y, double step);

struct FlatnessOrderResult {
    int k = 0;
    bool pass = false;
    int settled_at = -1;    // first index from which the ratios decrease
    double final_ratio = 0; // |f(h_m)| / h_m^k at the last sample
};

struct FlatnessReport {
    std::vector<FlatnessOrderResult> orders;

    bool passes(int k) const {
        for (const auto& o : orders)
            if (o.k == k) return o.pass;
        return false;
    }
};

/// Decay certificate for vanishing-to-order >= k along h_m = h0 * 2^-m:
/// the ratios |f(h_m)| / h_m^k must become decreasing and genuinely drop.
FlatnessReport taylor_flatness_test(const std::function<double(double)>& f, int k_max,
                                    double h0 = 0.5, int m_max = 40);

/// Truncation of the Taylor-coefficient recursion
///   (i-j) a_ij = b_{i-1,j-1},   (i-j) b_ij = a_{i-1,j-1}
/// with unknowns of total degree <= deg.  Equations whose left-hand
/// unknown exceeds the truncation keep their right-hand side with the
/// truncated unknown dropped, which pins the top diagonal pair.
Matrix<Rational> taylor_recursion_system(int deg);

/// Exact nullity of the truncated recursion; zero certifies rigidity.
int taylor_recursion_nullity(int deg);

} // namespace quantsurf::flatmodel
