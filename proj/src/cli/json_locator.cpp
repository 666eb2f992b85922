#include "zomd/cli/json_locator.hpp"

#include <cctype>
#include <cstring>
#include <string>
#include <vector>

namespace zomd::cli {

namespace {

std::vector<std::string> SplitPointer(std::string_view pointer) {
  std::vector<std::string> tokens;
  if (pointer.empty()) return tokens;
  std::size_t pos = pointer.front() == '/' ? 1 : 0;
  while (pos <= pointer.size()) {
    const std::size_t end = std::min(pointer.find('/', pos), pointer.size());
    std::string token;
    for (std::size_t k = pos; k < end; ++k) {
      if (pointer[k] == '~' && k + 1 < end) {
        token += pointer[k + 1] == '1' ? '/' : '~';
        ++k;
      } else {
        token += pointer[k];
      }
    }
    tokens.push_back(std::move(token));
    pos = end + 1;
  }
  return tokens;
}

// Walks a syntactically valid JSON document and records the line on which the
// value addressed by `target` starts.
class Locator {
 public:
  Locator(std::string_view text, std::vector<std::string> target) : s_(text), target_(std::move(target)) {}

  std::optional<int> run() {
    Value(0);
    return found_;
  }

 private:
  bool Matches(int depth, const std::string& token) const {
    return depth >= 0 && static_cast<std::size_t>(depth) < target_.size() && target_[depth] == token;
  }

  void Skip() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) {
      if (s_[i_] == '\n') ++line_;
      ++i_;
    }
  }

  char Peek() const { return i_ < s_.size() ? s_[i_] : '\0'; }

  std::string String() {
    std::string out;
    ++i_;
    while (i_ < s_.size() && s_[i_] != '"') {
      if (s_[i_] == '\\' && i_ + 1 < s_.size()) {
        out += s_[i_ + 1];
        i_ += 2;
      } else {
        out += s_[i_++];
      }
    }
    ++i_;
    return out;
  }

  void Value(int depth) {
    Skip();
    if (depth >= 0 && static_cast<std::size_t>(depth) == target_.size() && !found_) found_ = line_;
    const char c = Peek();
    if (c == '{') {
      ++i_;
      Skip();
      if (Peek() == '}') {
        ++i_;
        return;
      }
      while (i_ < s_.size()) {
        Skip();
        const std::string key = String();
        Skip();
        ++i_;  // ':'
        Value(Matches(depth, key) ? depth + 1 : -1);
        Skip();
        if (Peek() == ',') {
          ++i_;
          continue;
        }
        ++i_;  // '}'
        return;
      }
    } else if (c == '[') {
      ++i_;
      Skip();
      if (Peek() == ']') {
        ++i_;
        return;
      }
      for (std::size_t index = 0; i_ < s_.size(); ++index) {
        Value(Matches(depth, std::to_string(index)) ? depth + 1 : -1);
        Skip();
        if (Peek() == ',') {
          ++i_;
          continue;
        }
        ++i_;  // ']'
        return;
      }
    } else if (c == '"') {
      String();
    } else {
      while (i_ < s_.size() && !std::strchr(",]} \t\r\n", s_[i_])) ++i_;
    }
  }

  std::string_view s_;
  std::vector<std::string> target_;
  std::size_t i_ = 0;
  int line_ = 1;
  std::optional<int> found_;
};

}  // namespace

std::optional<int> locate_line(std::string_view text, std::string_view pointer) {
  std::vector<std::string> tokens = SplitPointer(pointer);
  // Missing members are reported at their closest existing ancestor.
  while (true) {
    if (auto line = Locator(text, tokens).run()) return line;
    if (tokens.empty()) return std::nullopt;
    tokens.pop_back();
  }
}

}  // namespace zomd::cli
