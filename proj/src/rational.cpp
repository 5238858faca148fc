#include "dfipp/rational.hpp"

#include <cctype>
#include <stdexcept>

namespace dfipp {

Rational parse_rational(std::string_view text) {
  std::string s(text);
  if (s.empty()) throw std::invalid_argument("empty rational");
  for (char c : s) {
    if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '/' || c == '-')) {
      throw std::invalid_argument("malformed rational '" + s + "'");
    }
  }
  Rational q;
  if (q.set_str(s, 10) != 0) throw std::invalid_argument("malformed rational '" + s + "'");
  if (q.get_den() == 0) throw std::invalid_argument("zero denominator in '" + s + "'");
  q.canonicalize();
  return q;
}

std::string to_string(const Rational& q) {
  Rational c = q;
  c.canonicalize();
  return c.get_str();
}

double to_double(const Rational& q) { return q.get_d(); }

uint64_t floor_u64(const Rational& q) {
  if (q < 0) throw std::domain_error("negative rational");
  mpz_class r;
  mpz_fdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  if (!r.fits_ulong_p()) throw std::overflow_error("rational too large");
  return r.get_ui();
}

uint64_t ceil_u64(const Rational& q) {
  if (q < 0) throw std::domain_error("negative rational");
  mpz_class r;
  mpz_cdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  if (!r.fits_ulong_p()) throw std::overflow_error("rational too large");
  return r.get_ui();
}

std::string to_string(const Distance& d) { return d.infinite ? std::string("inf") : to_string(d.value); }

Rational ratio(uint64_t num, uint64_t den) {
  Rational q(static_cast<unsigned long>(num), static_cast<unsigned long>(den));
  q.canonicalize();
  return q;
}

}  // namespace dfipp
