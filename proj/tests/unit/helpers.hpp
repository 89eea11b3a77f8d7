#pragma once

#include <sstream>
#include <string>

#include "adscreen/dataset.hpp"

namespace testutil {

inline adscreen::Table table_from(const std::string& schema_json, const std::string& csv) {
  std::istringstream in(csv);
  return adscreen::read_csv(in, adscreen::parse_schema_json(schema_json));
}

inline std::string csv_of(const adscreen::Table& t) {
  std::ostringstream out;
  adscreen::write_csv(out, t);
  return out.str();
}

// Schema JSON for numeric columns x1..xn plus target y with levels HC, NonHC.
inline std::string numeric_schema(std::size_t n) {
  std::string s = R"({"columns":[)";
  for (std::size_t i = 1; i <= n; ++i) {
    s += R"({"name":"x)" + std::to_string(i) + R"(","kind":"numeric","group":"blood"},)";
  }
  s += R"({"name":"y","kind":"target","range":["HC","NonHC"]}]})";
  return s;
}

}  // namespace testutil
