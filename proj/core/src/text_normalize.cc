#include "crossfuse/text_normalize.h"

namespace crossfuse {
namespace {

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

char ToLowerAscii(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

bool IsHyperlink(std::string_view token) {
  return token.starts_with("http://") || token.starts_with("https://") ||
         token.starts_with("www.");
}

}  // namespace

std::string NormalizeTweetText(std::string_view raw) {
  std::string lower(raw);
  for (char& c : lower) c = ToLowerAscii(c);

  std::string out;
  out.reserve(lower.size());
  std::size_t i = 0;
  while (i < lower.size()) {
    if (IsSpace(lower[i])) {
      // Keep non-space separators; a space is dropped if one was just emitted.
      if (lower[i] != ' ' || out.empty() || out.back() != ' ') out += lower[i];
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < lower.size() && !IsSpace(lower[j])) ++j;
    std::string_view token(lower.data() + i, j - i);
    if (IsHyperlink(token)) {
      out += kLinkToken;
    } else {
      out += token;
    }
    i = j;
  }
  return out;
}

std::vector<std::string> WhitespaceTokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && IsSpace(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !IsSpace(text[j])) ++j;
    if (j > i) tokens.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return tokens;
}

TextInput NormalizeTweet(std::string_view raw) {
  TextInput t;
  t.raw = std::string(raw);
  t.normalized = NormalizeTweetText(raw);
  t.tokens = WhitespaceTokens(t.normalized);
  return t;
}

}  // namespace crossfuse
