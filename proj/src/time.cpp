#include "mspsc/time.hpp"

#include <cctype>
#include <cstdio>

#include "mspsc/error.hpp"

namespace mspsc {
namespace {

int read_digits(std::string_view text, std::size_t& pos, int count) {
  if (pos + count > text.size()) {
    throw Error(Errc::ParseError, "truncated timestamp '" + std::string(text) + "'");
  }
  int value = 0;
  for (int i = 0; i < count; ++i) {
    const char c = text[pos++];
    if (!std::isdigit(static_cast<unsigned char>(c))) {
      throw Error(Errc::ParseError, "bad digit in timestamp '" + std::string(text) + "'");
    }
    value = value * 10 + (c - '0');
  }
  return value;
}

void expect(std::string_view text, std::size_t& pos, char c) {
  if (pos >= text.size() || text[pos] != c) {
    throw Error(Errc::ParseError, "expected '" + std::string(1, c) + "' in timestamp '" +
                                      std::string(text) + "'");
  }
  ++pos;
}

}  // namespace

Timestamp parse_rfc3339(std::string_view text) {
  using namespace std::chrono;
  std::size_t pos = 0;
  const int y = read_digits(text, pos, 4);
  expect(text, pos, '-');
  const int mo = read_digits(text, pos, 2);
  expect(text, pos, '-');
  const int d = read_digits(text, pos, 2);
  if (pos >= text.size() || (text[pos] != 'T' && text[pos] != 't' && text[pos] != ' ')) {
    throw Error(Errc::ParseError, "missing time part in '" + std::string(text) + "'");
  }
  ++pos;
  const int hh = read_digits(text, pos, 2);
  expect(text, pos, ':');
  const int mm = read_digits(text, pos, 2);
  expect(text, pos, ':');
  const int ss = read_digits(text, pos, 2);
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
  }
  if (pos >= text.size()) {
    throw Error(Errc::ParseError, "missing offset in '" + std::string(text) + "'");
  }
  int offset_minutes = 0;
  const char zone = text[pos++];
  if (zone == 'Z' || zone == 'z') {
  } else if (zone == '+' || zone == '-') {
    const int oh = read_digits(text, pos, 2);
    expect(text, pos, ':');
    const int om = read_digits(text, pos, 2);
    offset_minutes = (oh * 60 + om) * (zone == '-' ? -1 : 1);
  } else {
    throw Error(Errc::ParseError, "bad offset in '" + std::string(text) + "'");
  }
  if (pos != text.size()) {
    throw Error(Errc::ParseError, "trailing characters in '" + std::string(text) + "'");
  }

  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || hh > 23 || mm > 59 || ss > 60) {
    throw Error(Errc::ParseError, "out-of-range field in '" + std::string(text) + "'");
  }
  const sys_seconds local = sys_days{ymd} + hours{hh} + minutes{mm} + seconds{ss};
  return local - minutes{offset_minutes};
}

std::string format_rfc3339(Timestamp t) {
  using namespace std::chrono;
  const auto day_point = floor<days>(t);
  const year_month_day ymd{day_point};
  const auto secs = (t - day_point).count();
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02lld:%02lld:%02lldZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<long long>(secs / 3600), static_cast<long long>((secs / 60) % 60),
                static_cast<long long>(secs % 60));
  return buf;
}

std::int64_t day_number(Timestamp t) noexcept {
  return std::chrono::floor<std::chrono::days>(t).time_since_epoch().count();
}

Timestamp start_of_day(Timestamp t) noexcept {
  return std::chrono::floor<std::chrono::days>(t);
}

}  // namespace mspsc
