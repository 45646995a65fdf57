#include "calib/answer.hpp"

#include <cctype>
#include <regex>

#include "calib/error.hpp"
#include "text_util.hpp"

namespace calib {
namespace {

// A decimal token, optionally with thousands separators ("1,200.50", "-3", ".5").
const std::regex& numeric_token_regex() {
  static const std::regex re(R"(-?(?:(?:\d{1,3}(?:,\d{3})+|\d+)(?:\.\d+)?|\.\d+))");
  return re;
}

const std::regex& answer_cue_regex() {
  static const std::regex re(R"(the answer is)", std::regex::icase);
  return re;
}

std::string canonical_decimal(std::string token) {
  std::erase(token, ',');
  bool negative = false;
  if (!token.empty() && token.front() == '-') {
    negative = true;
    token.erase(0, 1);
  }
  std::string integral = token;
  std::string fraction;
  if (auto dot = token.find('.'); dot != std::string::npos) {
    integral = token.substr(0, dot);
    fraction = token.substr(dot + 1);
  }
  auto first_nonzero = integral.find_first_not_of('0');
  integral = first_nonzero == std::string::npos ? "0" : integral.substr(first_nonzero);
  while (!fraction.empty() && fraction.back() == '0') fraction.pop_back();

  std::string out = integral;
  if (!fraction.empty()) out += "." + fraction;
  if (negative && out != "0") out.insert(out.begin(), '-');
  return out;
}

// Drops a leading '-' that is really a hyphen or subtraction glued to a word ("5-3").
std::string matched_numeric(std::string_view text, const std::cmatch& m) {
  std::string token = m.str();
  auto pos = static_cast<std::size_t>(m.position(0));
  if (token.front() == '-' && pos > 0 &&
      std::isalnum(static_cast<unsigned char>(text[pos - 1]))) {
    token.erase(0, 1);
  }
  return token;
}

std::optional<std::string> first_numeric_token(std::string_view text) {
  std::cmatch m;
  if (!std::regex_search(text.begin(), text.end(), m, numeric_token_regex())) return std::nullopt;
  return matched_numeric(text, m);
}

std::optional<std::string> last_numeric_token(std::string_view text) {
  std::optional<std::string> last;
  for (auto it = std::cregex_iterator(text.begin(), text.end(), numeric_token_regex());
       it != std::cregex_iterator(); ++it) {
    last = matched_numeric(text, *it);
  }
  return last;
}

std::optional<char> parenthesized_letter(std::string_view text, bool last) {
  static const std::regex re(R"(\(([A-Za-z])\))");
  std::optional<char> found;
  for (auto it = std::cregex_iterator(text.begin(), text.end(), re); it != std::cregex_iterator();
       ++it) {
    found = (*it)[1].str().front();
    if (!last) break;
  }
  return found;
}

std::optional<char> standalone_option_letter(std::string_view text) {
  static const std::regex re(R"(\b([A-E])\b)");
  std::optional<char> found;
  for (auto it = std::cregex_iterator(text.begin(), text.end(), re); it != std::cregex_iterator();
       ++it) {
    found = (*it)[1].str().front();
  }
  return found;
}

NormalizedAnswer normalize_choice(std::string_view raw) {
  std::string_view core = text::trim(raw);
  while (!core.empty() && std::string_view("([{\"'").find(core.front()) != std::string_view::npos) {
    core.remove_prefix(1);
  }
  while (!core.empty() && std::string_view(")]}\"'.:,;").find(core.back()) != std::string_view::npos) {
    core.remove_suffix(1);
  }
  auto is_letter = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; };
  char letter = 0;
  if (core.size() == 1 && is_letter(core[0])) {
    letter = core[0];
  } else if (core.size() > 1 && is_letter(core[0]) && !is_letter(core[1]) &&
             !std::isdigit(static_cast<unsigned char>(core[1]))) {
    letter = core[0];  // "B) Paris", "c: ..."
  } else if (auto p = parenthesized_letter(raw, false)) {
    letter = *p;
  } else if (auto s = standalone_option_letter(raw)) {
    letter = *s;
  } else {
    throw Error(ErrorCode::kUnparseableAnswer, "no option letter in '" + std::string(raw) + "'");
  }
  return {AnswerKind::kChoice,
          std::string(1, static_cast<char>(std::tolower(static_cast<unsigned char>(letter))))};
}

NormalizedAnswer normalize_freeform(std::string_view raw) {
  std::string out = text::to_lower(text::collapse_whitespace(raw));
  while (!out.empty() && out.back() == '.') out.pop_back();
  out = std::string(text::trim(out));
  if (out.empty()) {
    throw Error(ErrorCode::kUnparseableAnswer, "freeform answer is empty after normalization");
  }
  return {AnswerKind::kFreeform, out};
}

// Text following a cue, cut at the first sentence terminator or line break.
std::string_view cue_operand(std::string_view rest) {
  auto end = rest.find('\n');
  if (end != std::string_view::npos) rest = rest.substr(0, end);
  rest = text::trim(rest);
  while (!rest.empty() && (rest.front() == ':' || rest.front() == '=')) {
    rest = text::trim(rest.substr(1));
  }
  for (std::size_t i = 0; i < rest.size(); ++i) {
    char c = rest[i];
    if ((c == '.' || c == '!' || c == '?') &&
        (i + 1 == rest.size() || std::isspace(static_cast<unsigned char>(rest[i + 1])))) {
      return text::trim(rest.substr(0, i + 1));
    }
  }
  return rest;
}

std::optional<NormalizedAnswer> try_normalize(std::string_view raw, AnswerKind kind) {
  if (text::trim(raw).empty()) return std::nullopt;
  try {
    return normalize_answer(raw, kind);
  } catch (const Error&) {
    return std::nullopt;
  }
}

}  // namespace

std::string_view answer_kind_name(AnswerKind kind) {
  switch (kind) {
    case AnswerKind::kNumeric:
      return "numeric";
    case AnswerKind::kChoice:
      return "choice";
    case AnswerKind::kFreeform:
      return "freeform";
  }
  return "freeform";
}

AnswerKind parse_answer_kind(std::string_view name) {
  if (name == "numeric") return AnswerKind::kNumeric;
  if (name == "choice") return AnswerKind::kChoice;
  if (name == "freeform") return AnswerKind::kFreeform;
  throw Error(ErrorCode::kSchemaViolation, "unknown answer_kind '" + std::string(name) + "'");
}

NormalizedAnswer normalize_answer(std::string_view raw, AnswerKind kind) {
  if (text::trim(raw).empty()) {
    throw Error(ErrorCode::kInvalidArgument, "answer text is blank");
  }
  switch (kind) {
    case AnswerKind::kNumeric: {
      auto token = first_numeric_token(raw);
      if (!token) {
        throw Error(ErrorCode::kUnparseableAnswer,
                    "no decimal token in '" + std::string(raw) + "'");
      }
      return {AnswerKind::kNumeric, canonical_decimal(*token)};
    }
    case AnswerKind::kChoice:
      return normalize_choice(raw);
    case AnswerKind::kFreeform:
      return normalize_freeform(raw);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown answer kind");
}

std::optional<NormalizedAnswer> extract_final_answer(std::string_view rationale, AnswerKind kind) {
  std::cmatch last_cue;
  bool have_cue = false;
  for (auto it = std::cregex_iterator(rationale.begin(), rationale.end(), answer_cue_regex());
       it != std::cregex_iterator(); ++it) {
    last_cue = *it;
    have_cue = true;
  }
  if (have_cue) {
    auto after = static_cast<std::size_t>(last_cue.position(0) + last_cue.length(0));
    if (auto a = try_normalize(cue_operand(rationale.substr(after)), kind)) return a;
  }

  switch (kind) {
    case AnswerKind::kNumeric:
      if (auto token = last_numeric_token(rationale)) {
        return NormalizedAnswer{AnswerKind::kNumeric, canonical_decimal(*token)};
      }
      return std::nullopt;
    case AnswerKind::kChoice: {
      auto letter = parenthesized_letter(rationale, true);
      if (!letter) letter = standalone_option_letter(rationale);
      if (!letter) return std::nullopt;
      return NormalizedAnswer{
          AnswerKind::kChoice,
          std::string(1, static_cast<char>(std::tolower(static_cast<unsigned char>(*letter))))};
    }
    case AnswerKind::kFreeform:
      return std::nullopt;
  }
  return std::nullopt;
}

std::vector<NumericSpan> find_numeric_spans(std::string_view text) {
  std::vector<NumericSpan> spans;
  for (auto it = std::cregex_iterator(text.begin(), text.end(), numeric_token_regex());
       it != std::cregex_iterator(); ++it) {
    auto token = matched_numeric(text, *it);
    auto length = token.size();
    auto offset = static_cast<std::size_t>(it->position(0)) + (it->length(0) - length);
    spans.push_back({offset, length, {AnswerKind::kNumeric, canonical_decimal(token)}});
  }
  return spans;
}

}  // namespace calib
