#include "hecke/serialize.hpp"

#include <cctype>

namespace hecke {

std::string to_string(const Integer& v) { return v.str(); }

std::string to_string(const Rational& v) {
  if (denominator(v) == 1) return numerator(v).str();
  return numerator(v).str() + "/" + denominator(v).str();
}

std::string to_string(const GaussInt& z) {
  std::string out = z.re().str();
  if (z.im() < 0) {
    out += "-" + Integer(-z.im()).str() + "i";
  } else {
    out += "+" + z.im().str() + "i";
  }
  return out;
}

std::string to_string(const GaussRational& z) {
  if (z.den() == 1) return to_string(z.num());
  return "(" + to_string(z.num()) + ")/" + z.den().str();
}

namespace {

std::string strip(const std::string& s) {
  std::string out;
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c))) out += c;
  return out;
}

Integer parse_integer(const std::string& s) {
  if (s.empty()) throw Error(ErrorCode::kParse, "empty integer");
  std::size_t k = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (k == s.size()) throw Error(ErrorCode::kParse, "bad integer '" + s + "'");
  for (std::size_t t = k; t < s.size(); ++t)
    if (!std::isdigit(static_cast<unsigned char>(s[t]))) throw Error(ErrorCode::kParse, "bad integer '" + s + "'");
  Integer v(s.substr(k));
  return s[0] == '-' ? Integer(-v) : v;
}

// "a+bi" and friends, no parentheses or denominator.
GaussInt parse_plain(const std::string& s) {
  if (s.empty()) throw Error(ErrorCode::kParse, "empty Gaussian integer");
  if (s.back() != 'i') return GaussInt(parse_integer(s));
  // Split at the last sign not in position 0.
  std::size_t split = std::string::npos;
  for (std::size_t k = s.size() - 1; k > 0; --k)
    if (s[k] == '+' || s[k] == '-') {
      split = k;
      break;
    }
  std::string re_part = split == std::string::npos ? "" : s.substr(0, split);
  std::string im_part = split == std::string::npos ? s : s.substr(split);
  im_part.pop_back();
  Integer im;
  if (im_part.empty() || im_part == "+") im = 1;
  else if (im_part == "-") im = -1;
  else im = parse_integer(im_part);
  Integer re = re_part.empty() ? Integer(0) : parse_integer(re_part);
  return GaussInt(re, im);
}

}  // namespace

GaussRational parse_gauss_rational(const std::string& text) {
  const std::string s = strip(text);
  if (s.empty()) throw Error(ErrorCode::kParse, "empty value");
  std::string body = s;
  Integer den = 1;
  const auto slash = s.rfind('/');
  if (slash != std::string::npos) {
    body = s.substr(0, slash);
    den = parse_integer(s.substr(slash + 1));
    if (den == 0) throw Error(ErrorCode::kParse, "zero denominator");
  }
  if (body.size() >= 2 && body.front() == '(' && body.back() == ')') body = body.substr(1, body.size() - 2);
  return GaussRational(parse_plain(body), den);
}

GaussInt parse_gauss_int(const std::string& text) {
  GaussRational r = parse_gauss_rational(text);
  if (!r.is_integral()) throw Error(ErrorCode::kParse, "expected a Gaussian integer: " + text);
  return r.num();
}

Rational parse_rational(const std::string& text) {
  GaussRational r = parse_gauss_rational(text);
  if (!r.is_real()) throw Error(ErrorCode::kParse, "expected a rational: " + text);
  return r.re();
}

nlohmann::json to_json(const GaussRatMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(to_string(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json to_json(const GaussIntMatrix& m) { return to_json(to_rational(m)); }
nlohmann::json to_json(const SelfAdjointMatrix& m) { return to_json(m.matrix()); }

nlohmann::json to_json(const GaussVector& v) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& z : v) out.push_back(to_string(z));
  return out;
}


namespace {
GaussRational entry_from_json(const nlohmann::json& e) {
  if (e.is_string()) return parse_gauss_rational(e.get<std::string>());
  if (e.is_number_integer()) return GaussRational(e.get<long long>());
  throw Error(ErrorCode::kParse, "matrix entries must be strings or integers");
}
}  // namespace

GaussRatMatrix gauss_matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) throw Error(ErrorCode::kParse, "matrix must be a non-empty array of rows");
  std::vector<std::vector<GaussRational>> rows;
  for (const auto& row : j) {
    if (!row.is_array()) throw Error(ErrorCode::kParse, "matrix row must be an array");
    std::vector<GaussRational> r;
    for (const auto& e : row) r.push_back(entry_from_json(e));
    rows.push_back(std::move(r));
  }
  return GaussRatMatrix::from_rows(rows);
}

SelfAdjointMatrix self_adjoint_from_json(const nlohmann::json& j) {
  return SelfAdjointMatrix(gauss_matrix_from_json(j));
}

}  // namespace hecke
