#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "mspsc/grid.hpp"
#include "mspsc/time.hpp"

namespace mspsc {

enum class FactorKind { numeric, categorical };
enum class SourceGroup { weather, calendar, fitness };

inline constexpr std::array<SourceGroup, 3> kSourceGroups{SourceGroup::weather, SourceGroup::calendar,
                                                          SourceGroup::fitness};

std::string_view to_string(FactorKind kind) noexcept;
std::string_view to_string(SourceGroup group) noexcept;
FactorKind parse_factor_kind(std::string_view text);
SourceGroup parse_source_group(std::string_view text);

// A numeric reading or a categorical token.
using FactorValue = std::variant<double, std::string>;

inline bool is_numeric(const FactorValue& v) noexcept { return std::holds_alternative<double>(v); }

struct FactorDescriptor {
  std::string id;
  FactorKind kind = FactorKind::numeric;
  std::string unit;
  std::optional<std::pair<double, double>> range;
  SourceGroup group = SourceGroup::weather;
  // Allowed tokens for categorical factors; empty means any token.
  std::vector<std::string> categories;

  friend bool operator==(const FactorDescriptor&, const FactorDescriptor&) = default;
};

// What validate_snapshot does with a numeric value outside its range.
enum class RangePolicy { reject, clamp };

class FactorRegistry {
 public:
  FactorRegistry() = default;
  // Throws Error{InvalidArgument} on duplicate ids or an inverted range.
  explicit FactorRegistry(std::vector<FactorDescriptor> descriptors,
                          RangePolicy policy = RangePolicy::reject);

  const FactorDescriptor* find(std::string_view id) const noexcept;
  // Throws Error{UnknownFactor}.
  const FactorDescriptor& at(std::string_view id) const;

  const std::vector<FactorDescriptor>& descriptors() const noexcept { return descriptors_; }
  std::size_t size() const noexcept { return descriptors_.size(); }
  RangePolicy policy() const noexcept { return policy_; }
  std::vector<std::string> ids() const;

  static FactorRegistry from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;
  static FactorRegistry load(const std::filesystem::path& path);

  friend bool operator==(const FactorRegistry&, const FactorRegistry&) = default;

 private:
  std::vector<FactorDescriptor> descriptors_;
  RangePolicy policy_ = RangePolicy::reject;
};

// Absent factors are simply not keys of `values`.
struct EnvSnapshot {
  Timestamp captured_at{};
  std::map<std::string, FactorValue, std::less<>> values;

  const FactorValue* get(std::string_view id) const noexcept {
    auto it = values.find(id);
    return it == values.end() ? nullptr : &it->second;
  }
  bool has(std::string_view id) const noexcept { return values.find(id) != values.end(); }

  friend bool operator==(const EnvSnapshot&, const EnvSnapshot&) = default;
};

struct CheckIn {
  std::string user_id;
  Timestamp at{};
  GridIndex emotion;
  EnvSnapshot env;

  friend bool operator==(const CheckIn&, const CheckIn&) = default;
};

// Throws Error{UnknownFactor}, Error{KindMismatch}, or (under the reject
// policy) Error{OutOfRange}. Under the clamp policy numeric values are
// clamped into range instead.
EnvSnapshot validate_snapshot(EnvSnapshot snapshot, const FactorRegistry& registry);

// Nine factors across the three consent groups.
FactorRegistry default_registry();

}  // namespace mspsc
