#pragma once

#include <cfenv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

#include "probound/rational.hpp"

namespace probound {

/// IEEE 754 rounding direction for a single operation.
enum class Direction { Down, Up, Nearest };

/// Value format of the iteration vectors.
enum class Precision { Single, Double };

/// How directed rounding is realised.
///  - HardwareMode drives the FPU rounding-mode register (fesetround); every
///    operation is then correctly rounded in the ambient direction.
///  - Nudge never touches the FPU. Operations run under round-to-nearest and
///    the result is adjusted using error-free transformations; where the
///    rounding error cannot be recovered exactly the result is stepped one
///    ULP outward, which keeps the directed bound valid at the cost of up to
///    two ULPs of interval width.
enum class RoundingMode { HardwareMode, Nudge };

inline const char* to_string(Direction d) {
  switch (d) {
    case Direction::Down: return "down";
    case Direction::Up: return "up";
    case Direction::Nearest: return "nearest";
  }
  return "?";
}

inline const char* to_string(Precision p) {
  return p == Precision::Single ? "single" : "double";
}

inline const char* to_string(RoundingMode m) {
  return m == RoundingMode::HardwareMode ? "hardware" : "nudge";
}

namespace detail {

// Operations under the ambient FPU mode. The volatile round-trips force each
// evaluation to happen at runtime, in order, so the compiler cannot fold or
// reuse a result across a rounding-mode change (see the stress tests).
template <typename T>
inline T env_add(T a, T b) {
  volatile T va = a;
  volatile T r = va + b;
  return r;
}
template <typename T>
inline T env_sub(T a, T b) {
  volatile T va = a;
  volatile T r = va - b;
  return r;
}
template <typename T>
inline T env_mul(T a, T b) {
  volatile T va = a;
  volatile T r = va * b;
  return r;
}
template <typename T>
inline T env_div(T a, T b) {
  volatile T va = a;
  volatile T r = va / b;
  return r;
}

inline int to_fe(Direction d) {
  switch (d) {
    case Direction::Down: return FE_DOWNWARD;
    case Direction::Up: return FE_UPWARD;
    case Direction::Nearest: return FE_TONEAREST;
  }
  return FE_TONEAREST;
}

}  // namespace detail

template <typename T>
inline T next_up(T x) {
  return std::nextafter(x, std::numeric_limits<T>::infinity());
}
template <typename T>
inline T next_down(T x) {
  return std::nextafter(x, -std::numeric_limits<T>::infinity());
}

/// True iff the FPU rounding mode can be switched and directed operations
/// observably honour it. Probed once per process.
inline bool hardware_rounding_available() {
  static const bool available = [] {
    bool ok = std::fesetround(FE_DOWNWARD) == 0;
    double dn = detail::env_add(1.0, 0x1p-60);
    ok = ok && std::fesetround(FE_UPWARD) == 0;
    double up = detail::env_add(1.0, 0x1p-60);
    std::fesetround(FE_TONEAREST);
    return ok && dn == 1.0 && up == next_up(1.0);
  }();
  return available;
}

namespace detail {

// Error term of the rounded sum s = fl(a + b); exact in round-to-nearest for
// all finite inputs (Knuth's TwoSum).
template <typename T>
inline T two_sum_err(T s, T a, T b) {
  T bp = s - a;
  T ap = s - bp;
  T db = b - bp;
  T da = a - ap;
  return da + db;
}

// Steps the nearest-rounded result r to the directed bound given the sign of
// (exact - r). sign > 0 means the exact value lies above r.
template <typename T>
inline T step_to_direction(T r, int sign, Direction d) {
  if (sign > 0) return d == Direction::Up ? next_up(r) : r;
  if (sign < 0) return d == Direction::Down ? next_down(r) : r;
  return r;
}

// Magnitude below which the multiplication/division error-free transforms may
// lose the error term to underflow; fall back to a conservative one-ULP step.
inline constexpr double kEftGuard = 0x1p-500;

inline double nudge_add(double a, double b, Direction d) {
  double s = env_add(a, b);
  if (d == Direction::Nearest || !std::isfinite(s)) {
    if (std::isinf(s) && std::isfinite(a) && std::isfinite(b)) {
      if (d == Direction::Down && s > 0) return std::numeric_limits<double>::max();
      if (d == Direction::Up && s < 0) return -std::numeric_limits<double>::max();
    }
    return s;
  }
  double err = two_sum_err(s, a, b);
  return step_to_direction(s, err > 0 ? 1 : err < 0 ? -1 : 0, d);
}

inline double nudge_mul(double a, double b, Direction d) {
  double p = env_mul(a, b);
  if (d == Direction::Nearest || std::isnan(p)) return p;
  if (std::isinf(p) && std::isfinite(a) && std::isfinite(b)) {
    if (d == Direction::Down && p > 0) return std::numeric_limits<double>::max();
    if (d == Direction::Up && p < 0) return -std::numeric_limits<double>::max();
    return p;
  }
  if (p == 0.0) {
    if (a == 0.0 || b == 0.0) return p;
    // Nonzero product flushed to zero by nearest rounding.
    bool positive = (a > 0) == (b > 0);
    if (positive) return d == Direction::Up ? std::numeric_limits<double>::denorm_min() : 0.0;
    return d == Direction::Down ? -std::numeric_limits<double>::denorm_min() : -0.0;
  }
  if (std::abs(p) < kEftGuard)
    return d == Direction::Down ? next_down(p) : next_up(p);
  double err = std::fma(a, b, -p);  // exact: a*b = p + err
  return step_to_direction(p, err > 0 ? 1 : err < 0 ? -1 : 0, d);
}

inline double nudge_div(double a, double b, Direction d) {
  double q = env_div(a, b);
  if (d == Direction::Nearest || !std::isfinite(q)) return q;
  if (q == 0.0) {
    if (a == 0.0) return q;
    bool positive = (a > 0) == (b > 0);
    if (positive) return d == Direction::Up ? std::numeric_limits<double>::denorm_min() : 0.0;
    return d == Direction::Down ? -std::numeric_limits<double>::denorm_min() : -0.0;
  }
  double aq = std::abs(q), aa = std::abs(a), ab = std::abs(b);
  if (aq < kEftGuard || aa < kEftGuard || ab < kEftGuard || aq > 1.0 / kEftGuard ||
      ab > 1.0 / kEftGuard)
    return d == Direction::Down ? next_down(q) : next_up(q);
  // a = q*b - err, so exact - q = -err/b; only the sign is needed.
  double err = std::fma(q, b, -a);
  bool exact_above = (err < 0) != (b < 0);
  if (err == 0) return q;
  return step_to_direction(q, exact_above ? 1 : -1, d);
}

// Exactly representable double -> directed float.
inline float narrow_exact(double v, Direction d) {
  float f = static_cast<float>(v);  // nearest
  double fv = f;
  if (fv == v || d == Direction::Nearest || std::isnan(v)) return f;
  if (fv < v) return d == Direction::Up ? next_up(f) : f;
  return d == Direction::Down ? next_down(f) : f;
}

// Directed float result when the exact value is known to lie within half a
// double-ULP of s, on the side given by sign (0: exactly s). Adjacent doubles
// are at least one double-ULP apart and floats are a subset of the doubles,
// so the only float that can separate s from the exact value is s itself.
inline float narrow_with_sign(double s, int sign, Direction d) {
  if (sign == 0) return narrow_exact(s, d);
  bool s_is_float = static_cast<double>(static_cast<float>(s)) == s;
  if (sign > 0) {  // exact > s
    if (d == Direction::Down) return narrow_exact(s, Direction::Down);
    return s_is_float ? next_up(static_cast<float>(s)) : narrow_exact(s, Direction::Up);
  }
  if (d == Direction::Up) return narrow_exact(s, Direction::Up);
  return s_is_float ? next_down(static_cast<float>(s)) : narrow_exact(s, Direction::Down);
}

// Float operations route through double. The product of two floats is exact
// in double; for sums the double TwoSum error term recovers the exact
// position, and for quotients the fma residual does (it cannot underflow for
// float-valued operands). Nothing here can overflow a double.
inline float nudge_add(float a, float b, Direction d) {
  if (d == Direction::Nearest) return env_add(a, b);
  double da = a, db = b;
  double s = env_add(da, db);
  if (!std::isfinite(s)) return static_cast<float>(s);
  double err = two_sum_err(s, da, db);
  return narrow_with_sign(s, err > 0 ? 1 : err < 0 ? -1 : 0, d);
}

inline float nudge_mul(float a, float b, Direction d) {
  if (d == Direction::Nearest) return env_mul(a, b);
  return narrow_exact(env_mul<double>(a, b), d);
}

inline float nudge_div(float a, float b, Direction d) {
  if (d == Direction::Nearest) return env_div(a, b);
  double da = a, db = b;
  double q = env_div(da, db);
  if (!std::isfinite(q)) return static_cast<float>(q);
  double err = std::fma(q, db, -da);  // a = q*b - err, so sign(exact - q) = sign(-err/b)
  bool exact_above = (err < 0) != (db < 0);
  return narrow_with_sign(q, err == 0 ? 0 : exact_above ? 1 : -1, d);
}

template <typename T>
inline T nudge_sub(T a, T b, Direction d) {
  return nudge_add(a, static_cast<T>(-b), d);
}

}  // namespace detail

/// Directed floating-point arithmetic context for one solver run.
///
/// Under HardwareMode the object owns the thread's FPU rounding mode: all
/// changes go through set_direction, which counts one mode switch per call.
/// Per-call operations taking an explicit direction temporarily switch the
/// mode when it differs from the ambient one. The previous mode is restored
/// on destruction. Instances are single-threaded; the FPU mode is per-thread
/// state, so distinct threads may each run their own Rounder.
class Rounder {
 public:
  explicit Rounder(RoundingMode requested)
      : requested_(requested),
        mode_((requested == RoundingMode::HardwareMode && hardware_rounding_available())
                  ? RoundingMode::HardwareMode
                  : RoundingMode::Nudge) {
    if (mode_ == RoundingMode::HardwareMode && std::fegetround() != FE_TONEAREST)
      std::fesetround(FE_TONEAREST);
  }

  ~Rounder() {
    if (mode_ == RoundingMode::HardwareMode && current_ != Direction::Nearest)
      std::fesetround(FE_TONEAREST);
  }

  Rounder(const Rounder&) = delete;
  Rounder& operator=(const Rounder&) = delete;

  RoundingMode mode() const { return mode_; }
  bool fell_back_to_nudge() const {
    return requested_ == RoundingMode::HardwareMode && mode_ == RoundingMode::Nudge;
  }
  std::uint64_t mode_switches() const { return switches_; }
  Direction current_direction() const { return current_; }

  /// Switches the ambient rounding direction. Counts one switch even when the
  /// requested direction is already current.
  void set_direction(Direction d) {
    if (mode_ == RoundingMode::HardwareMode) {
      std::fesetround(detail::to_fe(d));
      ++switches_;
    }
    current_ = d;
  }

  /// Runs body with the ambient direction set to d, restoring the previous
  /// direction afterwards (also on exceptions). Exactly two mode switches.
  template <typename F>
  auto with_direction(Direction d, F&& body) {
    struct Restore {
      Rounder& r;
      Direction prev;
      ~Restore() { r.set_direction(prev); }
    } restore{*this, current_};
    set_direction(d);
    return std::forward<F>(body)();
  }

  template <typename T>
  T add(T a, T b, Direction d) {
    return apply(a, b, d, [](T x, T y) { return detail::env_add(x, y); },
                 [](T x, T y, Direction dd) { return detail::nudge_add(x, y, dd); });
  }
  template <typename T>
  T sub(T a, T b, Direction d) {
    return apply(a, b, d, [](T x, T y) { return detail::env_sub(x, y); },
                 [](T x, T y, Direction dd) { return detail::nudge_sub(x, y, dd); });
  }
  template <typename T>
  T mul(T a, T b, Direction d) {
    return apply(a, b, d, [](T x, T y) { return detail::env_mul(x, y); },
                 [](T x, T y, Direction dd) { return detail::nudge_mul(x, y, dd); });
  }
  template <typename T>
  T div(T a, T b, Direction d) {
    return apply(a, b, d, [](T x, T y) { return detail::env_div(x, y); },
                 [](T x, T y, Direction dd) { return detail::nudge_div(x, y, dd); });
  }

 private:
  template <typename T, typename Hw, typename Sw>
  T apply(T a, T b, Direction d, Hw hw, Sw sw) {
    if (mode_ == RoundingMode::HardwareMode) {
      if (d == current_) return hw(a, b);
      return with_direction(d, [&] { return hw(a, b); });
    }
    return sw(a, b, d);
  }

  RoundingMode requested_;
  RoundingMode mode_;
  Direction current_ = Direction::Nearest;
  std::uint64_t switches_ = 0;
};

/// Correctly rounded conversion of a non-negative rational to a value of
/// floating-point type T, in the given direction. Software only: independent
/// of strategy and of the ambient FPU mode.
template <typename T>
inline T rational_to(const Rational& q, Direction dir) {
  static_assert(std::numeric_limits<T>::is_iec559);
  if (q == 0) return T(0);
  if (q < 0) throw std::domain_error("rational_to: negative value");
  constexpr int mant = std::numeric_limits<T>::digits;        // 53 or 24
  constexpr int min_exp = std::numeric_limits<T>::min_exponent;  // -1021 or -125
  BigInt num = numerator(q), den = denominator(q);
  // e = floor(log2(q)): the unique e with 2^e <= q < 2^(e+1).
  long e = static_cast<long>(msb(num)) - static_cast<long>(msb(den));
  {
    BigInt lhs = num, rhs = den;
    if (e >= 0)
      rhs <<= e;
    else
      lhs <<= -e;
    if (lhs < rhs) --e;
  }
  // Position of the least significant bit of the target significand.
  long lsb = (e >= min_exp - 1) ? e - (mant - 1) : min_exp - mant;
  BigInt scaled_num = num, divisor = den;
  if (lsb <= 0)
    scaled_num <<= -lsb;
  else
    divisor <<= lsb;
  BigInt mantissa, rem;
  divide_qr(scaled_num, divisor, mantissa, rem);
  bool round_away = false;
  switch (dir) {
    case Direction::Down:
      break;
    case Direction::Up:
      round_away = rem != 0;
      break;
    case Direction::Nearest: {
      BigInt twice = rem << 1;
      if (twice > divisor)
        round_away = true;
      else if (twice == divisor)
        round_away = bit_test(mantissa, 0);
      break;
    }
  }
  if (round_away) ++mantissa;
  // mantissa <= 2^mant <= 2^53; exactly representable in double, and the
  // scaled value is representable in T, so both steps below are exact.
  double v = std::ldexp(mantissa.template convert_to<double>(), static_cast<int>(lsb));
  return static_cast<T>(v);
}

/// Runtime-precision variant. The returned double holds a value exactly
/// representable in the requested precision.
inline double rational_to_float(const Rational& q, Precision p, Direction dir) {
  if (p == Precision::Single) return rational_to<float>(q, dir);
  return rational_to<double>(q, dir);
}

/// Exact value of a finite floating-point number as a rational.
inline Rational rational_from_float(double x) {
  if (!std::isfinite(x))
    throw std::domain_error("rational_from_float: non-finite value");
  if (x == 0) return Rational(0);
  int exp = 0;
  double f = std::frexp(x, &exp);     // x = f * 2^exp, 0.5 <= |f| < 1
  double scaled = std::ldexp(f, 53);  // integral, exact
  BigInt mant(static_cast<long long>(scaled));
  long e2 = exp - 53;
  if (e2 >= 0) return Rational(mant << e2);
  return Rational(mant, BigInt(1) << -e2);
}

/// Hexadecimal float literal; parses back bit-exactly with strtod.
inline std::string hex_float(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%a", x);
  return buf;
}

inline std::string decimal_float(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace probound
