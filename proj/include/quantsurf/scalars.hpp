#pragma once

#include <cmath>
#include <cstdint>

namespace quantsurf {

/// Second-order forward-mode value: f, grad(f), Hess(f) in two variables.
struct Jet2 {
    double v = 0;           // value
    double dx = 0, dy = 0;  // first derivatives
    double dxx = 0, dxy = 0, dyy = 0;

    Jet2() = default;
    explicit Jet2(double c) : v(c) {}

    static Jet2 var_x(double x) {
        Jet2 j(x);
        j.dx = 1;
        return j;
    }
    static Jet2 var_y(double y) {
        Jet2 j(y);
        j.dy = 1;
        return j;
    }
};

inline Jet2 operator+(const Jet2& a, const Jet2& b) {
    Jet2 r;
    r.v = a.v + b.v;
    r.dx = a.dx + b.dx;
    r.dy = a.dy + b.dy;
    r.dxx = a.dxx + b.dxx;
    r.dxy = a.dxy + b.dxy;
    r.dyy = a.dyy + b.dyy;
    return r;
}

inline Jet2 operator-(const Jet2& a, const Jet2& b) {
    Jet2 r;
    r.v = a.v - b.v;
    r.dx = a.dx - b.dx;
    r.dy = a.dy - b.dy;
    r.dxx = a.dxx - b.dxx;
    r.dxy = a.dxy - b.dxy;
    r.dyy = a.dyy - b.dyy;
    return r;
}

inline Jet2 operator-(const Jet2& a) {
    Jet2 r;
    r.v = -a.v;
    r.dx = -a.dx;
    r.dy = -a.dy;
    r.dxx = -a.dxx;
    r.dxy = -a.dxy;
    r.dyy = -a.dyy;
    return r;
}

inline Jet2 operator*(const Jet2& a, const Jet2& b) {
    Jet2 r;
    r.v = a.v * b.v;
    r.dx = a.dx * b.v + a.v * b.dx;
    r.dy = a.dy * b.v + a.v * b.dy;
    r.dxx = a.dxx * b.v + 2 * a.dx * b.dx + a.v * b.dxx;
    r.dxy = a.dxy * b.v + a.dx * b.dy + a.dy * b.dx + a.v * b.dxy;
    r.dyy = a.dyy * b.v + 2 * a.dy * b.dy + a.v * b.dyy;
    return r;
}

/// Chain rule for a scalar map g applied to jet a, given g(a.v), g'(a.v), g''(a.v).
inline Jet2 jet_compose(const Jet2& a, double g, double dg, double ddg) {
    Jet2 r;
    r.v = g;
    r.dx = dg * a.dx;
    r.dy = dg * a.dy;
    r.dxx = ddg * a.dx * a.dx + dg * a.dxx;
    r.dxy = ddg * a.dx * a.dy + dg * a.dxy;
    r.dyy = ddg * a.dy * a.dy + dg * a.dyy;
    return r;
}

inline Jet2 operator/(const Jet2& a, const Jet2& b) {
    double inv = 1.0 / b.v;
    return a * jet_compose(b, inv, -inv * inv, 2 * inv * inv * inv);
}

inline Jet2 sin(const Jet2& a) { return jet_compose(a, std::sin(a.v), std::cos(a.v), -std::sin(a.v)); }
inline Jet2 cos(const Jet2& a) { return jet_compose(a, std::cos(a.v), -std::sin(a.v), -std::cos(a.v)); }
inline Jet2 exp(const Jet2& a) {
    double e = std::exp(a.v);
    return jet_compose(a, e, e, e);
}
inline Jet2 log(const Jet2& a) {
    double inv = 1.0 / a.v;
    return jet_compose(a, std::log(a.v), inv, -inv * inv);
}
inline Jet2 sqrt(const Jet2& a) {
    double s = std::sqrt(a.v);
    return jet_compose(a, s, 0.5 / s, -0.25 / (s * a.v));
}

inline Jet2 pow_int(Jet2 base, long long n) {
    if (n == 0) return Jet2(1.0);
    bool neg = n < 0;
    unsigned long long m = neg ? static_cast<unsigned long long>(-n) : static_cast<unsigned long long>(n);
    Jet2 acc(1.0);
    while (m) {
        if (m & 1ull) acc = acc * base;
        base = base * base;
        m >>= 1;
    }
    if (neg) return Jet2(1.0) / acc;
    return acc;
}

inline Jet2 pow(const Jet2& a, const Jet2& b) { return exp(b * log(a)); }

inline double pow_int(double base, long long n) {
    if (n == 0) return 1.0;
    bool neg = n < 0;
    unsigned long long m = neg ? static_cast<unsigned long long>(-n) : static_cast<unsigned long long>(n);
    double acc = 1.0;
    while (m) {
        if (m & 1ull) acc *= base;
        base *= base;
        m >>= 1;
    }
    return neg ? 1.0 / acc : acc;
}

} // namespace quantsurf
