#pragma once

// Text and JSON forms. Gaussian integers print as "a+bi" / "a-bi"; Gaussian
// rationals as "(a+bi)/d" (denominator 1 prints without the fraction).

#include <string>

#include <json.hpp>

#include "hecke/linalg.hpp"

namespace hecke {

std::string to_string(const Integer& v);
std::string to_string(const Rational& v);
std::string to_string(const GaussInt& z);
std::string to_string(const GaussRational& z);

/// Accepts "a+bi", "a-bi", "a", "bi", "i", "-i", "(a+bi)/d" and "a/d".
GaussRational parse_gauss_rational(const std::string& text);
GaussInt parse_gauss_int(const std::string& text);
Rational parse_rational(const std::string& text);

nlohmann::json to_json(const GaussRatMatrix& m);
nlohmann::json to_json(const GaussIntMatrix& m);
nlohmann::json to_json(const SelfAdjointMatrix& m);
nlohmann::json to_json(const GaussVector& v);

/// Rows of entry strings (numbers are accepted too).
GaussRatMatrix gauss_matrix_from_json(const nlohmann::json& j);
SelfAdjointMatrix self_adjoint_from_json(const nlohmann::json& j);

}  // namespace hecke
