#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <compare>
#include <string>

namespace qfound {

using Rational = boost::multiprecision::cpp_rational;

/// Element a + b*sqrt(2) of Q(sqrt 2).
class QSqrt2 {
   public:
    QSqrt2() = default;
    QSqrt2(int v) : a_(v) {}
    QSqrt2(Rational a, Rational b = 0) : a_(std::move(a)), b_(std::move(b)) {}

    static QSqrt2 sqrt2() { return {0, 1}; }

    const Rational &rational_part() const { return a_; }
    const Rational &sqrt2_part() const { return b_; }
    bool is_rational() const { return b_ == 0; }

    int sign() const;
    QSqrt2 inverse() const;
    double to_double() const;
    std::string to_string() const;

    QSqrt2 operator-() const { return {-a_, -b_}; }
    friend QSqrt2 operator+(const QSqrt2 &x, const QSqrt2 &y) { return {x.a_ + y.a_, x.b_ + y.b_}; }
    friend QSqrt2 operator-(const QSqrt2 &x, const QSqrt2 &y) { return {x.a_ - y.a_, x.b_ - y.b_}; }
    friend QSqrt2 operator*(const QSqrt2 &x, const QSqrt2 &y) {
        return {x.a_ * y.a_ + 2 * x.b_ * y.b_, x.a_ * y.b_ + x.b_ * y.a_};
    }
    friend QSqrt2 operator/(const QSqrt2 &x, const QSqrt2 &y) { return x * y.inverse(); }
    friend bool operator==(const QSqrt2 &x, const QSqrt2 &y) { return x.a_ == y.a_ && x.b_ == y.b_; }
    friend std::strong_ordering operator<=>(const QSqrt2 &x, const QSqrt2 &y) { return (x - y).sign() <=> 0; }

   private:
    Rational a_ = 0;
    Rational b_ = 0;
};

/// Exact real number in Q(sqrt(2 + sqrt 2)), stored as a + b*r with
/// a, b in Q(sqrt 2) and r = sqrt(2 + sqrt 2) = 2 cos(pi/8).
///
/// The field contains cos and sin of every multiple of pi/8, so beam-splitter
/// amplitudes at those angles and every probability derived from them are
/// represented without rounding. Ordering is decided exactly.
class ExactReal {
   public:
    ExactReal() = default;
    ExactReal(int v) : a_(v) {}
    ExactReal(Rational v) : a_(std::move(v)) {}
    ExactReal(QSqrt2 a, QSqrt2 b = QSqrt2()) : a_(std::move(a)), b_(std::move(b)) {}

    /// Exact binary value of a finite double.
    static ExactReal from_double(double v);
    static ExactReal sqrt2() { return ExactReal(QSqrt2::sqrt2()); }
    /// cos(k*pi/8) and sin(k*pi/8) for any integer k.
    static ExactReal cos_pi8(int k);
    static ExactReal sin_pi8(int k);

    bool is_rational() const { return b_ == QSqrt2() && a_.is_rational(); }
    /// Requires is_rational().
    Rational to_rational() const;

    int sign() const;
    ExactReal inverse() const;
    double to_double() const;
    /// "p/q" for rationals, otherwise a sum over the basis {1, sqrt2, r, sqrt2*r}.
    std::string to_string() const;

    ExactReal operator-() const { return {-a_, -b_}; }
    ExactReal &operator+=(const ExactReal &y) { return *this = *this + y; }
    ExactReal &operator-=(const ExactReal &y) { return *this = *this - y; }
    ExactReal &operator*=(const ExactReal &y) { return *this = *this * y; }
    friend ExactReal operator+(const ExactReal &x, const ExactReal &y) { return {x.a_ + y.a_, x.b_ + y.b_}; }
    friend ExactReal operator-(const ExactReal &x, const ExactReal &y) { return {x.a_ - y.a_, x.b_ - y.b_}; }
    friend ExactReal operator*(const ExactReal &x, const ExactReal &y);
    friend ExactReal operator/(const ExactReal &x, const ExactReal &y) { return x * y.inverse(); }
    friend bool operator==(const ExactReal &x, const ExactReal &y) { return x.a_ == y.a_ && x.b_ == y.b_; }
    friend std::strong_ordering operator<=>(const ExactReal &x, const ExactReal &y) {
        return (x - y).sign() <=> 0;
    }

   private:
    QSqrt2 a_;
    QSqrt2 b_;
};

inline ExactReal abs(const ExactReal &x) { return x.sign() < 0 ? -x : x; }

}  // namespace qfound
