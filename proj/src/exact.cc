#include "qfound/exact.h"

#include <cmath>
#include <stdexcept>

namespace qfound {

namespace {

int rational_sign(const Rational &x) { return x.sign(); }

double rational_to_double(const Rational &x) { return x.convert_to<double>(); }

std::string rational_to_string(const Rational &x) {
    std::string num = boost::multiprecision::numerator(x).str();
    auto den = boost::multiprecision::denominator(x);
    if (den == 1) return num;
    return num + "/" + den.str();
}

// (2 + sqrt 2), the square of the tower generator.
const QSqrt2 &generator_square() {
    static const QSqrt2 v(2, 1);
    return v;
}

}  // namespace

int QSqrt2::sign() const {
    int sa = rational_sign(a_);
    int sb = rational_sign(b_);
    if (sb == 0) return sa;
    if (sa == 0 || sa == sb) return sb;
    // Opposite signs: the larger magnitude wins. |a| vs |b| sqrt 2.
    Rational lhs = a_ * a_;
    Rational rhs = 2 * b_ * b_;
    return lhs > rhs ? sa : sb;
}

QSqrt2 QSqrt2::inverse() const {
    Rational den = a_ * a_ - 2 * b_ * b_;
    if (den == 0) throw std::domain_error("QSqrt2: division by zero");
    return {a_ / den, -b_ / den};
}

double QSqrt2::to_double() const { return rational_to_double(a_) + rational_to_double(b_) * std::sqrt(2.0); }

std::string QSqrt2::to_string() const {
    if (b_ == 0) return rational_to_string(a_);
    std::string s;
    if (a_ != 0) s = rational_to_string(a_) + " + ";
    return s + "(" + rational_to_string(b_) + ")*sqrt2";
}

ExactReal ExactReal::from_double(double v) {
    if (!std::isfinite(v)) throw std::domain_error("ExactReal::from_double: non-finite value");
    int exp = 0;
    double mant = std::frexp(v, &exp);
    // 53-bit integer mantissa times a power of two.
    auto m = static_cast<long long>(std::ldexp(mant, 53));
    exp -= 53;
    Rational r(m);
    boost::multiprecision::cpp_int p2 = 1;
    p2 <<= std::abs(exp);
    if (exp >= 0) {
        r *= Rational(p2);
    } else {
        r /= Rational(p2);
    }
    return ExactReal(r);
}

ExactReal ExactReal::cos_pi8(int k) {
    k %= 16;
    if (k < 0) k += 16;
    auto first_quadrant = [](int j) -> ExactReal {
        switch (j) {
            case 0:
                return 1;
            case 1:  // r/2
                return ExactReal(QSqrt2(), QSqrt2(Rational(1, 2)));
            case 2:  // sqrt2/2
                return ExactReal(QSqrt2(0, Rational(1, 2)));
            case 3:  // r (sqrt2 - 1)/2
                return ExactReal(QSqrt2(), QSqrt2(Rational(-1, 2), Rational(1, 2)));
            default:
                return 0;
        }
    };
    if (k <= 4) return first_quadrant(k);
    if (k <= 8) return -first_quadrant(8 - k);
    if (k <= 12) return -first_quadrant(k - 8);
    return first_quadrant(16 - k);
}

ExactReal ExactReal::sin_pi8(int k) { return cos_pi8(4 - k); }

Rational ExactReal::to_rational() const {
    if (!is_rational()) throw std::domain_error("ExactReal::to_rational: value is irrational");
    return a_.rational_part();
}

ExactReal operator*(const ExactReal &x, const ExactReal &y) {
    return {x.a_ * y.a_ + x.b_ * y.b_ * generator_square(), x.a_ * y.b_ + x.b_ * y.a_};
}

int ExactReal::sign() const {
    int sa = a_.sign();
    int sb = b_.sign();
    if (sb == 0) return sa;
    if (sa == 0 || sa == sb) return sb;
    QSqrt2 lhs = a_ * a_;
    QSqrt2 rhs = b_ * b_ * generator_square();
    return lhs > rhs ? sa : sb;
}

ExactReal ExactReal::inverse() const {
    QSqrt2 den = a_ * a_ - b_ * b_ * generator_square();
    if (den == QSqrt2()) throw std::domain_error("ExactReal: division by zero");
    QSqrt2 inv = den.inverse();
    return {a_ * inv, -(b_ * inv)};
}

double ExactReal::to_double() const {
    static const double r = std::sqrt(2.0 + std::sqrt(2.0));
    return a_.to_double() + b_.to_double() * r;
}

std::string ExactReal::to_string() const {
    if (b_ == QSqrt2()) return a_.to_string();
    std::string s;
    if (a_ != QSqrt2()) s = a_.to_string() + " + ";
    return s + "(" + b_.to_string() + ")*sqrt(2+sqrt2)";
}

}  // namespace qfound
