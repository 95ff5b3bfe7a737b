#include "hambvp/scenario.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace hambvp {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

double Scenario::number(const std::string& key, double fallback) const {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

std::string Scenario::text(const std::string& key, const std::string& fallback) const {
  auto it = raw.find(key);
  return it == raw.end() ? fallback : it->second;
}

Scenario Scenario::parse(const std::string& content) {
  Scenario sc;
  std::istringstream in(content);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("scenario line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw std::invalid_argument("scenario line " + std::to_string(lineno) + ": empty key or value");
    sc.raw[key] = value;
    try {
      size_t pos = 0;
      const double num = std::stod(value, &pos);
      if (pos == value.size()) sc.params[key] = num;
    } catch (const std::exception&) {
      // non-numeric value; kept in raw only
    }
  }
  if (sc.raw.count("system"))
    sc.name = sc.raw.at("system");
  else if (sc.raw.count("surface"))
    sc.name = sc.raw.at("surface");
  return sc;
}

Scenario Scenario::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  Scenario sc = parse(ss.str());
  if (sc.name.empty()) throw std::runtime_error(path + ": scenario names no catalog entry (key 'system')");
  return sc;
}

Scenario Scenario::resolve(const std::string& name_or_path) {
  if (std::filesystem::exists(name_or_path)) return load(name_or_path);
  Scenario sc;
  sc.name = name_or_path;
  return sc;
}

SeparatedBVP scenario_bvp(const Scenario& sc) {
  SeparatedBVP bvp = catalog_bvp(sc.name, sc.params);
  if (sc.params.count("tau")) bvp.tau = sc.params.at("tau");
  return bvp;
}

}  // namespace hambvp
