#pragma once

#include <cassert>
#include <cmath>
#include <complex>
#include <vector>

#include "quantsurf/errors.hpp"

namespace quantsurf {

/// Truncated power series in one variable, coefficients of t^0..t^N.
/// The scalar type needs ring operations; division by the scalar is used
/// by log/div/sqrt.  Used for transport-factor jets (complex and exact)
/// and as the workhorse behind the two-variable series.
template <typename T>
class Series1 {
public:
    Series1() = default;
    explicit Series1(int order) : c_(static_cast<size_t>(order) + 1, T(0)) {}
    Series1(int order, T constant) : Series1(order) { c_[0] = constant; }

    static Series1 variable(int order, T scale = T(1)) {
        Series1 s(order);
        if (order >= 1) s.c_[1] = scale;
        return s;
    }

    int order() const { return static_cast<int>(c_.size()) - 1; }
    const T& operator[](int k) const { return c_[static_cast<size_t>(k)]; }
    T& operator[](int k) { return c_[static_cast<size_t>(k)]; }
    const std::vector<T>& coeffs() const { return c_; }

    friend Series1 operator+(const Series1& a, const Series1& b) {
        Series1 r(a.order());
        for (int k = 0; k <= a.order(); ++k) r[k] = a[k] + b[k];
        return r;
    }
    friend Series1 operator-(const Series1& a, const Series1& b) {
        Series1 r(a.order());
        for (int k = 0; k <= a.order(); ++k) r[k] = a[k] - b[k];
        return r;
    }
    Series1 operator-() const {
        Series1 r(order());
        for (int k = 0; k <= order(); ++k) r[k] = -c_[static_cast<size_t>(k)];
        return r;
    }
    friend Series1 operator*(const Series1& a, const Series1& b) {
        Series1 r(a.order());
        for (int i = 0; i <= a.order(); ++i) {
            if (is_zero_coeff(a[i])) continue;
            for (int j = 0; i + j <= a.order(); ++j) r[i + j] += a[i] * b[j];
        }
        return r;
    }
    friend Series1 operator*(const T& s, const Series1& a) {
        Series1 r(a.order());
        for (int k = 0; k <= a.order(); ++k) r[k] = s * a[k];
        return r;
    }
    Series1& operator+=(const Series1& b) { return *this = *this + b; }
    Series1& operator-=(const Series1& b) { return *this = *this - b; }
    Series1& operator*=(const Series1& b) { return *this = *this * b; }

    /// exp of a series; the constant term must be exactly representable by
    /// the caller (exp of it is taken separately for exact scalar types).
    static Series1 exp_nonconst(const Series1& a) {
        // requires a[0] == 0; e_n = (1/n) sum_{k=1..n} k a_k e_{n-k}
        Series1 e(a.order());
        e[0] = T(1);
        for (int n = 1; n <= a.order(); ++n) {
            T acc(0);
            for (int k = 1; k <= n; ++k) acc += T(k) * a[k] * e[n - k];
            e[n] = acc / T(n);
        }
        return e;
    }

    T eval(const T& t) const {
        T acc(0);
        for (int k = order(); k >= 0; --k) acc = acc * t + c_[static_cast<size_t>(k)];
        return acc;
    }

private:
    static bool is_zero_coeff(const T& v) {
        if constexpr (requires(const T& x) { x.is_zero(); })
            return v.is_zero();
        else
            return v == T(0);
    }

    std::vector<T> c_;
};

using CSeries = Series1<std::complex<double>>;
using RSeries = Series1<double>;

/// Dense truncated series in two variables up to a total degree, used for
/// Taylor data of chart functions and for polynomial canonical maps.
/// Coefficient of x^i y^j sits at index idx(i,j).
class Series2 {
public:
    Series2() = default;
    explicit Series2(int deg) : deg_(deg), c_(size_of(deg), 0.0) {}
    Series2(int deg, double constant) : Series2(deg) { c_[0] = constant; }

    static Series2 variable_x(int deg, double base = 0.0) {
        Series2 s(deg, base);
        if (deg >= 1) s.at(1, 0) = 1.0;
        return s;
    }
    static Series2 variable_y(int deg, double base = 0.0) {
        Series2 s(deg, base);
        if (deg >= 1) s.at(0, 1) = 1.0;
        return s;
    }

    int degree() const { return deg_; }

    double& at(int i, int j) { return c_[idx(i, j)]; }
    const double& at(int i, int j) const { return c_[idx(i, j)]; }

    friend Series2 operator+(const Series2& a, const Series2& b) {
        Series2 r(a.deg_);
        for (size_t k = 0; k < r.c_.size(); ++k) r.c_[k] = a.c_[k] + b.c_[k];
        return r;
    }
    friend Series2 operator-(const Series2& a, const Series2& b) {
        Series2 r(a.deg_);
        for (size_t k = 0; k < r.c_.size(); ++k) r.c_[k] = a.c_[k] - b.c_[k];
        return r;
    }
    Series2 operator-() const {
        Series2 r(deg_);
        for (size_t k = 0; k < c_.size(); ++k) r.c_[k] = -c_[k];
        return r;
    }
    friend Series2 operator*(const Series2& a, const Series2& b) {
        Series2 r(a.deg_);
        for (int i = 0; i <= a.deg_; ++i)
            for (int j = 0; i + j <= a.deg_; ++j) {
                double ca = a.at(i, j);
                if (ca == 0.0) continue;
                for (int p = 0; p + i <= a.deg_; ++p)
                    for (int q = 0; p + q + i + j <= a.deg_; ++q) {
                        double cb = b.at(p, q);
                        if (cb != 0.0) r.at(i + p, j + q) += ca * cb;
                    }
            }
        return r;
    }
    friend Series2 operator*(double s, const Series2& a) {
        Series2 r(a.deg_);
        for (size_t k = 0; k < a.c_.size(); ++k) r.c_[k] = s * a.c_[k];
        return r;
    }
    friend Series2 operator/(const Series2& a, const Series2& b) {
        return a * compose_scalar(b, [](double v, int n) {
            // derivatives of 1/v at v: d^n (1/v) = (-1)^n n! v^{-(n+1)}
            double f = (n % 2 ? -1.0 : 1.0) / std::pow(v, n + 1);
            for (int k = 2; k <= n; ++k) f *= k;
            return f;
        });
    }

    Series2& operator+=(const Series2& b) { return *this = *this + b; }
    Series2& operator-=(const Series2& b) { return *this = *this - b; }
    Series2& operator*=(const Series2& b) { return *this = *this * b; }

    double eval(double x, double y) const {
        double acc = 0.0;
        for (int i = 0; i <= deg_; ++i)
            for (int j = 0; i + j <= deg_; ++j) acc += at(i, j) * std::pow(x, i) * std::pow(y, j);
        return acc;
    }

    Series2 dx() const {
        Series2 r(deg_);
        for (int i = 1; i <= deg_; ++i)
            for (int j = 0; i + j <= deg_; ++j) r.at(i - 1, j) = i * at(i, j);
        return r;
    }
    Series2 dy() const {
        Series2 r(deg_);
        for (int i = 0; i <= deg_; ++i)
            for (int j = 1; i + j <= deg_; ++j) r.at(i, j - 1) = j * at(i, j);
        return r;
    }

    /// Substitute series u, v for the variables (u, v share this degree).
    Series2 substitute(const Series2& u, const Series2& v) const {
        Series2 r(deg_, 0.0);
        // Horner in x with inner Horner in y
        for (int i = deg_; i >= 0; --i) {
            Series2 row(deg_, 0.0);
            for (int j = deg_ - i; j >= 0; --j) {
                row = row * v;
                row.c_[0] += at(i, j);
            }
            r = r * u + row;
        }
        return r;
    }

    /// f(series) for scalar f given by its derivatives at the constant term.
    template <typename DerivFn>
    static Series2 compose_scalar(const Series2& a, DerivFn deriv) {
        int K = a.deg_;
        Series2 shifted = a;
        double c0 = a.c_[0];
        shifted.c_[0] = 0.0;
        Series2 acc(K, 0.0);
        // Horner over shifted powers with Taylor coefficients deriv(c0,n)/n!
        double fact = 1.0;
        std::vector<double> coef(static_cast<size_t>(K) + 1);
        for (int n = 0; n <= K; ++n) {
            if (n > 0) fact *= n;
            coef[static_cast<size_t>(n)] = deriv(c0, n) / fact;
        }
        for (int n = K; n >= 0; --n) {
            acc = acc * shifted;
            acc.c_[0] += coef[static_cast<size_t>(n)];
        }
        return acc;
    }

    static size_t size_of(int deg) {
        return static_cast<size_t>((deg + 1) * (deg + 2) / 2);
    }

private:
    size_t idx(int i, int j) const {
        assert(i >= 0 && j >= 0 && i + j <= deg_);
        int d = i + j;
        return static_cast<size_t>(d * (d + 1) / 2 + j);
    }

    int deg_ = 0;
    std::vector<double> c_;
};

inline Series2 sin(const Series2& a) {
    return Series2::compose_scalar(a, [](double v, int n) {
        switch (n % 4) {
            case 0: return std::sin(v);
            case 1: return std::cos(v);
            case 2: return -std::sin(v);
            default: return -std::cos(v);
        }
    });
}
inline Series2 cos(const Series2& a) {
    return Series2::compose_scalar(a, [](double v, int n) {
        switch (n % 4) {
            case 0: return std::cos(v);
            case 1: return -std::sin(v);
            case 2: return -std::cos(v);
            default: return std::sin(v);
        }
    });
}
inline Series2 exp(const Series2& a) {
    return Series2::compose_scalar(a, [](double v, int) { return std::exp(v); });
}
inline Series2 log(const Series2& a) {
    return Series2::compose_scalar(a, [](double v, int n) {
        if (n == 0) return std::log(v);
        double f = (n % 2 ? 1.0 : -1.0) / std::pow(v, n);
        for (int k = 2; k < n; ++k) f *= k;
        return f;
    });
}
inline Series2 sqrt(const Series2& a) {
    // d^n sqrt(v) = sqrt(v) * prod_{k=0}^{n-1} (1/2 - k) / v^n
    return Series2::compose_scalar(a, [](double v, int n) {
        double acc = std::sqrt(v);
        for (int k = 0; k < n; ++k) acc *= (0.5 - k);
        return acc / std::pow(v, n);
    });
}
inline Series2 pow_int(const Series2& a, long long n) {
    Series2 acc(a.degree(), 1.0);
    if (n >= 0) {
        Series2 base = a;
        long long m = n;
        while (m) {
            if (m & 1) acc = acc * base;
            base = base * base;
            m >>= 1;
        }
        return acc;
    }
    return Series2(a.degree(), 1.0) / pow_int(a, -n);
}
inline Series2 pow(const Series2& a, const Series2& b) { return exp(b * log(a)); }

inline Series2 expr_constant(double v, const Series2& like) {
    return Series2(like.degree(), v);
}

} // namespace quantsurf
