#ifndef CROSSFUSE_TEXT_NORMALIZE_H_
#define CROSSFUSE_TEXT_NORMALIZE_H_

#include <string>
#include <string_view>
#include <vector>

namespace crossfuse {

// Sentinel that replaces every hyperlink.
inline constexpr std::string_view kLinkToken = "link";

struct TextInput {
  std::string raw;                  // text as received
  std::string normalized;           // output of NormalizeTweetText(raw)
  std::vector<std::string> tokens;  // whitespace tokens of `normalized`
};

// Lowercases ASCII letters, replaces every whitespace-delimited token that
// starts with "http://", "https://" or "www." by "link", and collapses runs
// of spaces into one. Idempotent.
std::string NormalizeTweetText(std::string_view raw);

TextInput NormalizeTweet(std::string_view raw);

// Splits on ASCII whitespace; never yields empty tokens.
std::vector<std::string> WhitespaceTokens(std::string_view text);

}  // namespace crossfuse

#endif  // CROSSFUSE_TEXT_NORMALIZE_H_
