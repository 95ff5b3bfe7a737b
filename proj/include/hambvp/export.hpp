#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "hambvp/bvp.hpp"
#include "hambvp/catastrophe.hpp"
#include "hambvp/georattle.hpp"
#include "hambvp/singular.hpp"

namespace hambvp {

using Json = nlohmann::ordered_json;

/// Shortest round-trip decimal form of a double (std::to_chars).
std::string format_double(double x);

/// CSV with a fixed header row; numeric cells use format_double, so identical
/// inputs produce byte-identical files.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(const std::vector<double>& values);
  void write(const std::string& path) const;
};

void write_json(const std::string& path, const Json& j);
void write_text(const std::string& path, const std::string& text);

Json diagram_to_json(const BifurcationDiagram& diagram);
CsvTable diagram_to_csv(const BifurcationDiagram& diagram);
BifurcationDiagram diagram_from_json(const Json& j);

Json locus_to_json(const ConjugateLocus& locus);
CsvTable locus_to_csv(const ConjugateLocus& locus);

Json level_set_to_json(const LevelSetResult& ls);
CsvTable level_set_to_csv(const LevelSetResult& ls);

Json d4_to_json(const D4LevelSet& set);
CsvTable d4_to_csv(const D4LevelSet& set);

/// Minimal deterministic SVG line plot (polylines plus point markers).
struct SvgPlot {
  std::string title, x_label, y_label;
  std::vector<std::vector<Eigen::Vector2d>> polylines;
  std::vector<Eigen::Vector2d> points;
  void write(const std::string& path) const;
};

}  // namespace hambvp
