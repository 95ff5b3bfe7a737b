#pragma once

#include <map>
#include <string>

#include "hambvp/bvp.hpp"
#include "hambvp/systems.hpp"

namespace hambvp {

/// Key/value scenario document: a catalog entry name plus parameter
/// overrides. Lines are `key = value`; '#' starts a comment.
struct Scenario {
  std::string name;                        // catalog system (key `system`) or surface (key `surface`)
  std::map<std::string, std::string> raw;  // every key as text
  Params params;                           // numeric keys

  bool has(const std::string& key) const { return raw.count(key) > 0; }
  double number(const std::string& key, double fallback) const;
  std::string text(const std::string& key, const std::string& fallback) const;

  static Scenario parse(const std::string& content);
  static Scenario load(const std::string& path);

  /// Treats `name_or_path` as a file when it exists, else a catalog name.
  static Scenario resolve(const std::string& name_or_path);
};

/// Catalog problem with scenario overrides (tau, boundary values) applied.
SeparatedBVP scenario_bvp(const Scenario& sc);

}  // namespace hambvp
