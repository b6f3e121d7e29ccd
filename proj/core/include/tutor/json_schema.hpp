#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace tutor::json_schema {

struct Violation {
  std::string path;  // JSON pointer into the instance
  std::string message;
};

/// Validator for the draft 2020-12 keywords the shipped schemas use: type
/// (string or list), enum, const, properties, required,
/// additionalProperties (bool or schema), items, minItems, maxItems,
/// minimum, maximum, minLength, pattern, anyOf, oneOf, and local $ref into
/// $defs / definitions. Unknown keywords are ignored.
class Validator {
 public:
  explicit Validator(nlohmann::json schema);
  static Validator from_file(const std::filesystem::path& path);

  std::vector<Violation> validate(const nlohmann::json& instance) const;
  bool valid(const nlohmann::json& instance) const { return validate(instance).empty(); }

 private:
  void check(const nlohmann::json& schema, const nlohmann::json& instance, const std::string& path,
             std::vector<Violation>& out, int depth) const;
  const nlohmann::json& resolve(const std::string& ref) const;

  nlohmann::json root_;
};

}  // namespace tutor::json_schema
