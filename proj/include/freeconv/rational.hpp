#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <stdexcept>
#include <string>

namespace freeconv {

/// Arbitrary-precision rational used by the exact moment/cumulant engine.
using Rat = boost::multiprecision::cpp_rational;

inline double to_double(const Rat& r) { return r.convert_to<double>(); }

/// Exact conversion: every finite double is a dyadic rational.
inline Rat rat_from_double(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("rat_from_double: non-finite");
  int exp = 0;
  double mant = std::frexp(x, &exp);  // x = mant * 2^exp, |mant| in [0.5, 1)
  long long scaled = static_cast<long long>(std::ldexp(mant, 53));
  exp -= 53;
  Rat r(scaled);
  boost::multiprecision::cpp_int pow2 = boost::multiprecision::pow(
      boost::multiprecision::cpp_int(2), static_cast<unsigned>(std::abs(exp)));
  if (exp >= 0)
    r *= Rat(pow2);
  else
    r /= Rat(pow2);
  return r;
}

/// "p/q" (or plain integer) rendering used by manifest serialization.
inline std::string rat_to_string(const Rat& r) {
  std::string s = numerator(r).str();
  if (denominator(r) != 1) s += "/" + denominator(r).str();
  return s;
}

inline Rat rat_parse(const std::string& s) {
  auto slash = s.find('/');
  if (slash == std::string::npos) return Rat(boost::multiprecision::cpp_int(s));
  return Rat(boost::multiprecision::cpp_int(s.substr(0, slash)),
             boost::multiprecision::cpp_int(s.substr(slash + 1)));
}

}  // namespace freeconv
