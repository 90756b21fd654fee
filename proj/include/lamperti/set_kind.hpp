#ifndef LAMPERTI_SET_KIND_HPP
#define LAMPERTI_SET_KIND_HPP

#include <algorithm>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lamperti {

// Site sets counted along the path.
//   cw        weak cutpoints
//   cab a b   xi(x) = a, xi(x,up) = b
//   cstar a   xi(x,up) = a
//   cAa A a   xi(x) in A, xi(x,up) = a
//   caB a B   xi(x) = a, xi(x,up) in B
struct SetKind {
  enum class Tag { cw, cab, cstar, cAa, caB };

  Tag tag = Tag::cw;
  std::int64_t a = 0;
  std::int64_t b = 0;
  std::vector<std::int64_t> set;

  static SetKind weak() { return {}; }
  static SetKind local_up(std::int64_t a, std::int64_t b) {
    if (b < 1 || a < b) throw std::invalid_argument("cab requires a >= b >= 1");
    return {Tag::cab, a, b, {}};
  }
  static SetKind up(std::int64_t a) {
    if (a < 1) throw std::invalid_argument("cstar requires a >= 1");
    return {Tag::cstar, a, 0, {}};
  }
  static SetKind local_set(std::vector<std::int64_t> big_a, std::int64_t a) {
    if (a < 1 || big_a.empty()) throw std::invalid_argument("cAa requires a >= 1 and nonempty A");
    std::sort(big_a.begin(), big_a.end());
    big_a.erase(std::unique(big_a.begin(), big_a.end()), big_a.end());
    if (big_a.front() < a) throw std::invalid_argument("cAa requires A within {a, a+1, ...}");
    return {Tag::cAa, a, 0, std::move(big_a)};
  }
  static SetKind up_set(std::int64_t a, std::vector<std::int64_t> big_b) {
    if (a < 1 || big_b.empty()) throw std::invalid_argument("caB requires a >= 1 and nonempty B");
    std::sort(big_b.begin(), big_b.end());
    big_b.erase(std::unique(big_b.begin(), big_b.end()), big_b.end());
    if (big_b.front() < 1 || big_b.back() > a) {
      throw std::invalid_argument("caB requires B within {1..a}");
    }
    return {Tag::caB, a, 0, std::move(big_b)};
  }

  // Elementary (local time, upcrossing) pairs making up this kind; empty for cw and cstar.
  std::vector<std::pair<std::int64_t, std::int64_t>> components() const {
    std::vector<std::pair<std::int64_t, std::int64_t>> out;
    switch (tag) {
      case Tag::cab:
        out.emplace_back(a, b);
        break;
      case Tag::cAa:
        for (auto v : set) out.emplace_back(v, a);
        break;
      case Tag::caB:
        for (auto v : set) out.emplace_back(a, v);
        break;
      default:
        break;
    }
    return out;
  }

  std::string label() const {
    auto join = [](const std::vector<std::int64_t>& v) {
      std::ostringstream os;
      for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "+" : "") << v[i];
      return os.str();
    };
    switch (tag) {
      case Tag::cw:
        return "cw";
      case Tag::cab:
        return "cab:" + std::to_string(a) + ":" + std::to_string(b);
      case Tag::cstar:
        return "cstar:" + std::to_string(a);
      case Tag::cAa:
        return "cAa:" + join(set) + ":" + std::to_string(a);
      case Tag::caB:
        return "caB:" + std::to_string(a) + ":" + join(set);
    }
    return "";
  }

  friend bool operator==(const SetKind&, const SetKind&) = default;
};

namespace detail {

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::int64_t parse_int(const std::string& s) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw std::invalid_argument("bad integer in set kind: '" + s + "'");
  return v;
}

inline std::vector<std::int64_t> parse_int_set(const std::string& s) {
  std::vector<std::int64_t> out;
  for (const auto& part : split(s, '+')) out.push_back(parse_int(part));
  return out;
}

}  // namespace detail

// Inverse of SetKind::label().
inline SetKind parse_set_kind(std::string_view text) {
  const auto parts = detail::split(text, ':');
  const std::string& head = parts[0];
  if (head == "cw" && parts.size() == 1) return SetKind::weak();
  if (head == "cab" && parts.size() == 3) {
    return SetKind::local_up(detail::parse_int(parts[1]), detail::parse_int(parts[2]));
  }
  if (head == "cstar" && parts.size() == 2) return SetKind::up(detail::parse_int(parts[1]));
  if (head == "cAa" && parts.size() == 3) {
    return SetKind::local_set(detail::parse_int_set(parts[1]), detail::parse_int(parts[2]));
  }
  if (head == "caB" && parts.size() == 3) {
    return SetKind::up_set(detail::parse_int(parts[1]), detail::parse_int_set(parts[2]));
  }
  throw std::invalid_argument("unknown set kind: " + std::string(text));
}

inline std::vector<SetKind> parse_set_kinds(std::string_view csv) {
  std::vector<SetKind> out;
  for (const auto& item : detail::split(csv, ',')) {
    if (!item.empty()) out.push_back(parse_set_kind(item));
  }
  if (out.empty()) throw std::invalid_argument("no set kinds given");
  return out;
}

}  // namespace lamperti

#endif  // LAMPERTI_SET_KIND_HPP
