#include "tutor/json_schema.hpp"

#include <algorithm>
#include <fstream>
#include <regex>

#include "tutor/error.hpp"

namespace tutor::json_schema {

using nlohmann::json;

Validator::Validator(json schema) : root_(std::move(schema)) {}

Validator Validator::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open schema " + path.string());
  return Validator(json::parse(in));
}

const json& Validator::resolve(const std::string& ref) const {
  if (ref.rfind("#", 0) != 0) throw Error("only local $ref is supported: " + ref);
  return root_.at(json::json_pointer(ref.substr(1)));
}

namespace {

bool type_matches(const std::string& type, const json& v) {
  if (type == "null") return v.is_null();
  if (type == "boolean") return v.is_boolean();
  if (type == "object") return v.is_object();
  if (type == "array") return v.is_array();
  if (type == "string") return v.is_string();
  if (type == "number") return v.is_number();
  if (type == "integer") {
    if (v.is_number_integer()) return true;
    return v.is_number_float() && v.get<double>() == static_cast<double>(static_cast<long long>(v.get<double>()));
  }
  return false;
}

std::string escape_token(const std::string& key) {
  std::string out;
  for (const char c : key) {
    if (c == '~') out += "~0";
    else if (c == '/') out += "~1";
    else out.push_back(c);
  }
  return out;
}

std::size_t utf8_length(const std::string& s) {
  std::size_t n = 0;
  for (const unsigned char c : s) n += (c & 0xC0) != 0x80;
  return n;
}

}  // namespace

void Validator::check(const json& schema, const json& v, const std::string& path, std::vector<Violation>& out,
                      int depth) const {
  if (depth > 64) throw Error("schema recursion too deep at " + path);
  if (schema.is_boolean()) {
    if (!schema.get<bool>()) out.push_back({path, "no value allowed here"});
    return;
  }
  if (!schema.is_object()) return;
  const auto at = [&](const char* key) -> const json* {
    const auto it = schema.find(key);
    return it == schema.end() ? nullptr : &*it;
  };

  if (const auto* ref = at("$ref")) check(resolve(ref->get<std::string>()), v, path, out, depth + 1);

  if (const auto* type = at("type")) {
    bool ok = false;
    if (type->is_string()) ok = type_matches(type->get<std::string>(), v);
    else for (const auto& t : *type) ok = ok || type_matches(t.get<std::string>(), v);
    if (!ok) {
      out.push_back({path, "expected type " + type->dump() + ", got " + std::string(v.type_name())});
      return;
    }
  }
  if (const auto* e = at("enum")) {
    if (std::find(e->begin(), e->end(), v) == e->end()) out.push_back({path, "value not in enum " + e->dump()});
  }
  if (const auto* c = at("const"); c && *c != v) out.push_back({path, "expected " + c->dump()});

  if (v.is_number()) {
    const double d = v.get<double>();
    if (const auto* m = at("minimum"); m && d < m->get<double>()) out.push_back({path, "below minimum " + m->dump()});
    if (const auto* m = at("maximum"); m && d > m->get<double>()) out.push_back({path, "above maximum " + m->dump()});
  }
  if (v.is_string()) {
    const auto& s = v.get_ref<const std::string&>();
    if (const auto* m = at("minLength"); m && utf8_length(s) < m->get<std::size_t>()) {
      out.push_back({path, "shorter than " + m->dump()});
    }
    if (const auto* p = at("pattern")) {
      if (!std::regex_search(s, std::regex(p->get<std::string>(), std::regex::ECMAScript))) {
        out.push_back({path, "does not match pattern " + p->dump()});
      }
    }
  }
  if (v.is_object()) {
    if (const auto* req = at("required")) {
      for (const auto& k : *req) {
        if (!v.contains(k.get<std::string>())) out.push_back({path, "missing required property " + k.dump()});
      }
    }
    const auto* props = at("properties");
    const auto* extra = at("additionalProperties");
    for (const auto& [key, value] : v.items()) {
      const auto child = path + "/" + escape_token(key);
      if (props && props->contains(key)) {
        check(props->at(key), value, child, out, depth + 1);
      } else if (extra) {
        if (extra->is_boolean() && !extra->get<bool>()) out.push_back({child, "unexpected property"});
        else check(*extra, value, child, out, depth + 1);
      }
    }
  }
  if (v.is_array()) {
    if (const auto* m = at("minItems"); m && v.size() < m->get<std::size_t>()) {
      out.push_back({path, "fewer than " + m->dump() + " items"});
    }
    if (const auto* m = at("maxItems"); m && v.size() > m->get<std::size_t>()) {
      out.push_back({path, "more than " + m->dump() + " items"});
    }
    if (const auto* items = at("items")) {
      for (std::size_t i = 0; i < v.size(); ++i) check(*items, v[i], path + "/" + std::to_string(i), out, depth + 1);
    }
  }
  const auto count_matches = [&](const json& list) {
    std::size_t n = 0;
    for (const auto& sub : list) {
      std::vector<Violation> tmp;
      check(sub, v, path, tmp, depth + 1);
      n += tmp.empty();
    }
    return n;
  };
  if (const auto* any = at("anyOf"); any && count_matches(*any) == 0) out.push_back({path, "matches no anyOf branch"});
  if (const auto* one = at("oneOf")) {
    if (const auto n = count_matches(*one); n != 1) {
      out.push_back({path, "matches " + std::to_string(n) + " oneOf branches, expected 1"});
    }
  }
}

std::vector<Violation> Validator::validate(const json& instance) const {
  std::vector<Violation> out;
  check(root_, instance, "", out, 0);
  return out;
}

}  // namespace tutor::json_schema
