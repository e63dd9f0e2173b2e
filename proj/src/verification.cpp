#include "prefforge/verification.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>

#include "prefforge/errors.hpp"

namespace prefforge::verification {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

// Exact rational value. den > 0 always.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;
};

bool append_digit(std::int64_t& v, char c) {
  if (v > (INT64_MAX - 9) / 10) return false;  // keep headroom for any digit
  v = v * 10 + (c - '0');
  return true;
}

// Accepts [+-]?digits, [+-]?digits.digits?, [+-]?.digits and
// [+-]?digits/[+-]?digits. No exponents, no LaTeX.
std::optional<Rational> parse_rational(const std::string& canonical) {
  std::string s;
  s.reserve(canonical.size());
  for (char c : canonical)
    if (!is_space(c)) s.push_back(c);
  if (s.empty()) return std::nullopt;

  std::size_t i = 0;
  auto read_sign = [&]() {
    std::int64_t sign = 1;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
      if (s[i] == '-') sign = -1;
      ++i;
    }
    return sign;
  };

  const std::int64_t sign = read_sign();
  std::int64_t int_part = 0;
  bool any_digits = false;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
    if (!append_digit(int_part, s[i])) return std::nullopt;
    any_digits = true;
    ++i;
  }

  if (i < s.size() && s[i] == '.') {
    ++i;
    std::int64_t num = int_part;
    std::int64_t den = 1;
    bool frac_digits = false;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
      if (!append_digit(num, s[i])) return std::nullopt;
      if (den > INT64_MAX / 10) return std::nullopt;
      den *= 10;
      frac_digits = true;
      ++i;
    }
    if (i != s.size() || (!any_digits && !frac_digits)) return std::nullopt;
    return Rational{sign * num, den};
  }

  if (i < s.size() && s[i] == '/') {
    if (!any_digits) return std::nullopt;
    ++i;
    const std::int64_t dsign = read_sign();
    std::int64_t den = 0;
    bool den_digits = false;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
      if (!append_digit(den, s[i])) return std::nullopt;
      den_digits = true;
      ++i;
    }
    if (i != s.size() || !den_digits || den == 0) return std::nullopt;
    return Rational{sign * dsign * int_part, den};
  }

  if (i != s.size() || !any_digits) return std::nullopt;
  return Rational{sign * int_part, 1};
}

bool rationals_equal(const Rational& a, const Rational& b) {
  return static_cast<__int128>(a.num) * b.den == static_cast<__int128>(b.num) * a.den;
}

}  // namespace

std::string canonicalize_answer(const std::string& answer) {
  std::string t = trim(answer);
  while (t.size() >= 2 && t.front() == '$' && t.back() == '$')
    t = trim(t.substr(1, t.size() - 2));
  std::string out;
  out.reserve(t.size());
  bool in_space = false;
  for (char c : t) {
    if (is_space(c)) {
      in_space = true;
      continue;
    }
    if (in_space && !out.empty()) out.push_back(' ');
    in_space = false;
    out.push_back(c);
  }
  return out;
}

bool answers_equivalent(const std::string& a, const std::string& b) {
  if (a.empty() || b.empty())
    throw Error("answers_equivalent requires non-empty answers");
  const std::string ca = canonicalize_answer(a);
  const std::string cb = canonicalize_answer(b);
  if (ca == cb) return true;
  const auto ra = parse_rational(ca);
  if (!ra) return false;
  const auto rb = parse_rational(cb);
  if (!rb) return false;
  return rationals_equal(*ra, *rb);
}

std::optional<std::string> extract_answer(const std::string& text) {
  static constexpr std::string_view kMarker = "\\boxed{";
  const std::size_t pos = text.rfind(kMarker);
  if (pos == std::string::npos) return std::nullopt;

  const std::size_t start = pos + kMarker.size();
  int depth = 1;
  for (std::size_t i = start; i < text.size(); ++i) {
    if (text[i] == '{') {
      ++depth;
    } else if (text[i] == '}') {
      if (--depth == 0) return text.substr(start, i - start);
    }
  }
  return std::nullopt;  // last group never closes
}

datasets::ResponseRecord label_outcome(const datasets::ResponseRecord& response,
                                       const datasets::QuestionRecord& question) {
  datasets::ResponseRecord out = response;
  out.answer = extract_answer(response.text);
  out.correct = out.answer && !out.answer->empty() &&
                answers_equivalent(*out.answer, question.reference_answer);
  return out;
}

std::vector<StepAnnotation> filter_annotations(
    const std::vector<StepAnnotation>& annotations) {
  std::vector<StepAnnotation> retained;
  for (const auto& a : annotations) {
    if (a.step_labels.empty())
      throw Error("annotation '" + a.rid + "' has no step labels");
    const bool all_ok =
        std::all_of(a.step_labels.begin(), a.step_labels.end(), [](bool b) { return b; });
    const bool keep = a.outcome_matches_reference ? all_ok : !all_ok;
    if (keep) retained.push_back(a);
  }
  return retained;
}

}  // namespace prefforge::verification
