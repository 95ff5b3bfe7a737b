#include "hambvp/export.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace hambvp {

std::string format_double(double x) {
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  (void)ec;
  return std::string(buf, ptr);
}

void CsvTable::add_row(const std::vector<double>& values) {
  std::vector<std::string> row;
  row.reserve(values.size());
  for (double v : values) row.push_back(format_double(v));
  rows.push_back(std::move(row));
}

void CsvTable::write(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  for (size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << "\n";
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << "\n";
  }
}

void write_json(const std::string& path, const Json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << j.dump(2) << "\n";
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << text;
}

namespace {

Json vec_to_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vec_from_json(const Json& a) {
  Eigen::VectorXd v(a.size());
  for (size_t i = 0; i < a.size(); ++i) v[i] = a[i].get<double>();
  return v;
}

}  // namespace

Json diagram_to_json(const BifurcationDiagram& diagram) {
  Json j;
  j["schema"] = "hambvp.diagram/1";
  j["scenario"] = diagram.scenario;
  j["method"] = diagram.method;
  j["steps"] = diagram.steps;
  j["tau"] = diagram.tau;
  Json branches = Json::array();
  for (const Branch& b : diagram.branches) {
    Json pts = Json::array();
    for (const BranchPoint& p : b.points) {
      Json pj;
      pj["mu"] = vec_to_json(p.mu);
      pj["y"] = vec_to_json(p.y);
      pj["z"] = vec_to_json(p.z_full);
      pj["tag"] = tag_name(p.tag);
      pj["residual"] = p.residual_norm;
      pj["det"] = p.det_Dy;
      pts.push_back(std::move(pj));
    }
    branches.push_back(Json{{"points", std::move(pts)}});
  }
  j["branches"] = std::move(branches);
  j["notes"] = diagram.notes;
  return j;
}

BifurcationDiagram diagram_from_json(const Json& j) {
  BifurcationDiagram d;
  d.scenario = j.value("scenario", "");
  d.method = j.value("method", "");
  d.steps = j.value("steps", 0);
  d.tau = j.value("tau", 0.0);
  for (const Json& bj : j.at("branches")) {
    Branch b;
    for (const Json& pj : bj.at("points")) {
      BranchPoint p;
      p.mu = vec_from_json(pj.at("mu"));
      p.y = vec_from_json(pj.at("y"));
      p.z_full = vec_from_json(pj.at("z"));
      const std::string tag = pj.value("tag", "regular");
      p.tag = tag == "fold"              ? PointTag::fold
              : tag == "cusp_candidate"  ? PointTag::cusp_candidate
              : tag == "umbilic_candidate" ? PointTag::umbilic_candidate
                                           : PointTag::regular;
      p.residual_norm = pj.value("residual", 0.0);
      p.det_Dy = pj.value("det", 0.0);
      b.points.push_back(std::move(p));
    }
    d.branches.push_back(std::move(b));
  }
  return d;
}

CsvTable diagram_to_csv(const BifurcationDiagram& diagram) {
  CsvTable t;
  const int m_mu = diagram.branches.empty() || diagram.branches[0].points.empty()
                       ? 1
                       : static_cast<int>(diagram.branches[0].points[0].mu.size());
  const int n_y = diagram.branches.empty() || diagram.branches[0].points.empty()
                      ? 1
                      : static_cast<int>(diagram.branches[0].points[0].y.size());
  t.header.push_back("branch");
  for (int i = 0; i < m_mu; ++i) t.header.push_back("mu" + std::to_string(i + 1));
  for (int i = 0; i < n_y; ++i) t.header.push_back("y" + std::to_string(i + 1));
  t.header.push_back("tag");
  int bi = 0;
  for (const Branch& b : diagram.branches) {
    for (const BranchPoint& p : b.points) {
      std::vector<std::string> row;
      row.push_back(std::to_string(bi));
      for (int i = 0; i < p.mu.size(); ++i) row.push_back(format_double(p.mu[i]));
      for (int i = 0; i < p.y.size(); ++i) row.push_back(format_double(p.y[i]));
      row.push_back(tag_name(p.tag));
      t.rows.push_back(std::move(row));
    }
    ++bi;
  }
  return t;
}

Json locus_to_json(const ConjugateLocus& locus) {
  Json j;
  j["schema"] = "hambvp.conjugate_locus/1";
  j["q_star"] = vec_to_json(locus.q_star);
  j["h"] = locus.h;
  j["max_arc"] = locus.max_arc;
  j["drop_coordinate"] = locus.drop_coordinate;
  Json cusps = Json::array();
  for (int idx : locus.cusp_rays) {
    const RayResult& r = locus.rays[idx];
    Json c;
    c["ray_index"] = idx;
    c["rho"] = vec_to_json(r.rho);
    c["arc"] = r.arc;
    c["endpoint"] = vec_to_json(r.endpoint);
    c["corank"] = r.corank;
    cusps.push_back(std::move(c));
  }
  j["cusps"] = std::move(cusps);
  int degenerate = 0;
  for (const RayResult& r : locus.rays)
    if (r.degenerate) ++degenerate;
  j["rays_total"] = locus.rays.size();
  j["rays_degenerate"] = degenerate;
  return j;
}

CsvTable locus_to_csv(const ConjugateLocus& locus) {
  CsvTable t;
  const int rho_dim = locus.rays.empty() ? 2 : static_cast<int>(locus.rays[0].rho.size());
  const int amb = static_cast<int>(locus.q_star.size());
  for (int i = 0; i < rho_dim; ++i) t.header.push_back("rho" + std::to_string(i + 1));
  t.header.push_back("degenerate");
  t.header.push_back("arc");
  for (int i = 0; i < amb; ++i) t.header.push_back("Q" + std::to_string(i + 1));
  t.header.push_back("corank");
  for (const RayResult& r : locus.rays) {
    std::vector<std::string> row;
    for (int i = 0; i < rho_dim; ++i) row.push_back(format_double(r.rho[i]));
    row.push_back(r.degenerate ? "1" : "0");
    row.push_back(format_double(r.degenerate ? r.arc : std::nan("")));
    for (int i = 0; i < amb; ++i)
      row.push_back(format_double(r.degenerate && r.endpoint.size() == amb ? r.endpoint[i] : std::nan("")));
    row.push_back(std::to_string(r.corank));
    t.rows.push_back(std::move(row));
  }
  return t;
}

Json level_set_to_json(const LevelSetResult& ls) {
  Json j;
  j["schema"] = "hambvp.level_set/1";
  j["dim"] = ls.dim;
  if (ls.dim == 2) {
    Json segs = Json::array();
    for (const auto& s : ls.seg.segments) segs.push_back(Json::array({s[0], s[1]}));
    j["segments"] = std::move(segs);
    j["vertex_count"] = ls.seg.vertices.size();
  } else {
    Json tris = Json::array();
    for (const auto& t : ls.tri.triangles) tris.push_back(Json::array({t[0], t[1], t[2]}));
    j["triangles"] = std::move(tris);
    j["vertex_count"] = ls.tri.vertices.size();
  }
  return j;
}

CsvTable level_set_to_csv(const LevelSetResult& ls) {
  CsvTable t;
  const int dn = ls.dim;
  const int mn = ls.mapped.empty() ? dn : static_cast<int>(ls.mapped[0].size());
  for (int i = 0; i < dn; ++i) t.header.push_back("u" + std::to_string(i + 1));
  for (int i = 0; i < mn; ++i) t.header.push_back("b" + std::to_string(i + 1));
  t.header.push_back("sigma_ratio");
  t.header.push_back("corank");
  const size_t nv = ls.dim == 2 ? ls.seg.vertices.size() : ls.tri.vertices.size();
  for (size_t v = 0; v < nv; ++v) {
    std::vector<double> row;
    if (ls.dim == 2) {
      row.push_back(ls.seg.vertices[v][0]);
      row.push_back(ls.seg.vertices[v][1]);
    } else {
      row.push_back(ls.tri.vertices[v][0]);
      row.push_back(ls.tri.vertices[v][1]);
      row.push_back(ls.tri.vertices[v][2]);
    }
    for (int i = 0; i < mn; ++i) row.push_back(ls.mapped[v][i]);
    row.push_back(ls.vertex_sigma_ratio[v]);
    row.push_back(ls.vertex_corank[v]);
    t.add_row(row);
  }
  return t;
}

Json d4_to_json(const D4LevelSet& set) {
  Json j;
  j["schema"] = "hambvp.d4_level_set/1";
  j["kind"] = set.plus ? "plus" : "minus";
  j["mu4"] = set.mu4;
  Json slices = Json::array();
  for (const D4Slice& s : set.slices) {
    Json sj;
    sj["mu3"] = s.mu3;
    sj["degenerate_point"] = s.degenerate_point;
    sj["sample_count"] = s.xy.size();
    Json cusps = Json::array();
    for (const D4CuspPoint& c : s.cusps) {
      cusps.push_back(Json{{"x", c.xy[0]}, {"y", c.xy[1]}, {"mu1", c.mu12[0]}, {"mu2", c.mu12[1]}, {"mu3", c.mu3}});
    }
    sj["cusps"] = std::move(cusps);
    slices.push_back(std::move(sj));
  }
  j["slices"] = std::move(slices);
  return j;
}

CsvTable d4_to_csv(const D4LevelSet& set) {
  CsvTable t;
  t.header = {"mu1", "mu2", "mu3", "x", "y", "curve"};
  for (const D4Slice& s : set.slices)
    for (size_t i = 0; i < s.xy.size(); ++i)
      t.add_row({s.mu12[i][0], s.mu12[i][1], s.mu3, s.xy[i][0], s.xy[i][1], double(s.curve_id[i])});
  return t;
}

void SvgPlot::write(const std::string& path) const {
  const double W = 720, H = 540, margin = 60;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  auto acc = [&](const Eigen::Vector2d& p) {
    xmin = std::min(xmin, p[0]);
    xmax = std::max(xmax, p[0]);
    ymin = std::min(ymin, p[1]);
    ymax = std::max(ymax, p[1]);
  };
  for (const auto& line : polylines)
    for (const auto& p : line) acc(p);
  for (const auto& p : points) acc(p);
  if (xmin > xmax) {
    xmin = 0;
    xmax = 1;
    ymin = 0;
    ymax = 1;
  }
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  auto X = [&](double x) { return margin + (x - xmin) / (xmax - xmin) * (W - 2 * margin); };
  auto Y = [&](double y) { return H - margin - (y - ymin) / (ymax - ymin) * (H - 2 * margin); };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << title << "</text>\n";
  s << "<line x1=\"" << margin << "\" y1=\"" << H - margin << "\" x2=\"" << W - margin << "\" y2=\"" << H - margin
    << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\"" << H - margin
    << "\" stroke=\"black\"/>\n";
  s << "<text x=\"" << W / 2 << "\" y=\"" << H - 16 << "\" text-anchor=\"middle\" font-size=\"12\">" << x_label
    << "</text>\n";
  s << "<text x=\"18\" y=\"" << H / 2 << "\" font-size=\"12\" transform=\"rotate(-90 18 " << H / 2 << ")\">"
    << y_label << "</text>\n";
  s << "<text x=\"" << margin << "\" y=\"" << H - margin + 16 << "\" font-size=\"10\">" << format_double(xmin)
    << "</text>\n";
  s << "<text x=\"" << W - margin << "\" y=\"" << H - margin + 16 << "\" text-anchor=\"end\" font-size=\"10\">"
    << format_double(xmax) << "</text>\n";
  s << "<text x=\"" << margin - 4 << "\" y=\"" << H - margin << "\" text-anchor=\"end\" font-size=\"10\">"
    << format_double(ymin) << "</text>\n";
  s << "<text x=\"" << margin - 4 << "\" y=\"" << margin << "\" text-anchor=\"end\" font-size=\"10\">"
    << format_double(ymax) << "</text>\n";
  for (const auto& line : polylines) {
    s << "<polyline fill=\"none\" stroke=\"#1f5fbf\" stroke-width=\"1\" points=\"";
    for (const auto& p : line) s << format_double(X(p[0])) << "," << format_double(Y(p[1])) << " ";
    s << "\"/>\n";
  }
  for (const auto& p : points)
    s << "<circle cx=\"" << format_double(X(p[0])) << "\" cy=\"" << format_double(Y(p[1]))
      << "\" r=\"2.5\" fill=\"#bf1f1f\"/>\n";
  s << "</svg>\n";
  write_text(path, s.str());
}

}  // namespace hambvp
