#include "idla/svg.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace idla {

namespace {

const char* const kPalette[] = {"#e6194b", "#3cb44b", "#4363d8", "#f58231", "#911eb4", "#46f0f0",
                                "#f032e6", "#bcf60c", "#008080", "#9a6324", "#800000", "#000075"};
constexpr const char* kRed = "#d62728";
constexpr const char* kBlue = "#1f77b4";
constexpr const char* kCommon = "#b0b0b0";
constexpr const char* kGreen = "#2ca02c";
constexpr const char* kPlainEdge = "#606060";

struct Canvas {
  int dim = 2;
  std::int64_t cell = 8;
  std::int64_t min_x = 0, max_x = 0, min_y = 0, max_y = 0;  // lattice bounds after projection
  std::int64_t margin = 20;
  std::int64_t legend_h = 24;

  // Horizontal axis follows coordinate 1, vertical axis coordinate 0 (up).
  std::int64_t px(const Site& s) const {
    std::int64_t x = s[1];
    if (dim == 3) x = x * 2 + s[2];
    return margin + (x - min_x) * cell;
  }
  std::int64_t py(const Site& s) const {
    std::int64_t y = s[0];
    if (dim == 3) y = y * 2 + s[2];
    return margin + legend_h + (max_y - y) * cell;
  }
  std::int64_t width() const { return 2 * margin + (max_x - min_x + 1) * cell; }
  std::int64_t height() const { return 2 * margin + legend_h + (max_y - min_y + 1) * cell; }
};

Canvas make_canvas(int dim, const std::vector<Site>& sites) {
  if (dim != 2 && dim != 3) {
    throw Error(ErrorCode::unsupported_dimension, "figures support d=2 and d=3 only, got d=" + std::to_string(dim));
  }
  Canvas c;
  c.dim = dim;
  std::int64_t lo_x = -4, hi_x = 4, lo_y = -4, hi_y = 4;
  for (const auto& s : sites) {
    std::int64_t x = s[1], y = s[0];
    if (dim == 3) {
      x = x * 2 + s[2];
      y = y * 2 + s[2];
    }
    lo_x = std::min(lo_x, x);
    hi_x = std::max(hi_x, x);
    lo_y = std::min(lo_y, y);
    hi_y = std::max(hi_y, y);
  }
  c.min_x = lo_x;
  c.max_x = hi_x;
  c.min_y = lo_y;
  c.max_y = hi_y;
  const std::int64_t span = std::max(hi_x - lo_x, hi_y - lo_y) + 1;
  c.cell = std::clamp<std::int64_t>(800 / span, 2, 16);
  if (dim == 3) c.cell = std::max<std::int64_t>(2, c.cell & ~std::int64_t{1});
  return c;
}

void open_document(std::ostringstream& o, const Canvas& c, const std::string& title) {
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << c.width() << "\" height=\""
    << c.height() << "\" viewBox=\"0 0 " << c.width() << ' ' << c.height() << "\">\n";
  o << "<title>" << title << "</title>\n";
  o << "<rect class=\"background\" x=\"0\" y=\"0\" width=\"" << c.width() << "\" height=\"" << c.height()
    << "\" fill=\"#ffffff\"/>\n";
  // Axes through the origin: the hyperplane H is the horizontal line.
  const Site origin(c.dim);
  const std::int64_t ox = c.px(origin) + c.cell / 2;
  const std::int64_t oy = c.py(origin) + c.cell / 2;
  o << "<line class=\"axis\" x1=\"" << c.margin << "\" y1=\"" << oy << "\" x2=\"" << c.width() - c.margin
    << "\" y2=\"" << oy << "\" stroke=\"#cccccc\" stroke-width=\"1\"/>\n";
  o << "<line class=\"axis\" x1=\"" << ox << "\" y1=\"" << c.margin + c.legend_h << "\" x2=\"" << ox << "\" y2=\""
    << c.height() - c.margin << "\" stroke=\"#cccccc\" stroke-width=\"1\"/>\n";
}

void legend(std::ostringstream& o, const std::vector<std::pair<std::string, std::string>>& entries) {
  o << "<g class=\"legend\" font-family=\"sans-serif\" font-size=\"11\">\n";
  std::int64_t x = 20;
  for (const auto& [color, label] : entries) {
    o << "  <rect class=\"legend-swatch\" x=\"" << x << "\" y=\"8\" width=\"10\" height=\"10\" fill=\"" << color
      << "\"/>\n";
    o << "  <text x=\"" << x + 14 << "\" y=\"17\">" << label << "</text>\n";
    x += 24 + static_cast<std::int64_t>(label.size()) * 7;
  }
  o << "</g>\n";
}

void site_rect(std::ostringstream& o, const Canvas& c, const Site& s, const std::string& cls, const char* fill) {
  o << "<rect class=\"" << cls << "\" x=\"" << c.px(s) << "\" y=\"" << c.py(s) << "\" width=\"" << c.cell
    << "\" height=\"" << c.cell << "\" fill=\"" << fill << "\" stroke=\"#ffffff\" stroke-width=\"0.5\"/>\n";
}

void edge_line(std::ostringstream& o, const Canvas& c, const Site& a, const Site& b, const std::string& cls,
               const char* stroke) {
  const std::int64_t h = c.cell / 2;
  o << "<line class=\"" << cls << "\" x1=\"" << c.px(a) + h << "\" y1=\"" << c.py(a) + h << "\" x2=\"" << c.px(b) + h
    << "\" y2=\"" << c.py(b) + h << "\" stroke=\"" << stroke << "\" stroke-width=\"" << std::max<std::int64_t>(1, c.cell / 4)
    << "\"/>\n";
}

}  // namespace

std::string tree_color(const Site& root) {
  return kPalette[std::hash<Site>{}(root) % (sizeof(kPalette) / sizeof(kPalette[0]))];
}

std::string forest_svg(const Snapshot& snap) {
  const int dim = snap.header.dim;
  const Canvas c = make_canvas(dim, snap.sites);
  std::ostringstream o;
  open_document(o, c, "IDLA forest d=" + std::to_string(dim) + " M=" + std::to_string(snap.header.M));

  std::vector<std::size_t> root(snap.size());
  for (std::size_t i = 0; i < snap.size(); ++i) {
    root[i] = snap.parents[i] < 0 ? i : root[static_cast<std::size_t>(snap.parents[i])];
  }
  if (dim == 2) {
    for (std::size_t i = 0; i < snap.size(); ++i) {
      site_rect(o, c, snap.sites[i], "site", tree_color(snap.sites[root[i]]).c_str());
    }
    for (std::size_t i = 0; i < snap.size(); ++i) {
      if (snap.parents[i] < 0) continue;
      edge_line(o, c, snap.sites[static_cast<std::size_t>(snap.parents[i])], snap.sites[i], "edge", kPlainEdge);
    }
  } else {
    // Back to front along the third axis so nearer cubes cover farther ones.
    std::vector<std::size_t> idx(snap.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return snap.sites[a][2] > snap.sites[b][2]; });
    for (auto i : idx) site_rect(o, c, snap.sites[i], "site", tree_color(snap.sites[root[i]]).c_str());
  }
  legend(o, {{kPalette[0], "one color per tree"}, {kPlainEdge, dim == 2 ? "entry edge" : "sites projected"}});
  o << "</svg>\n";
  return o.str();
}

std::string coupling_svg(const Aggregate& small, const Aggregate& large, const DiscrepancyReport& report) {
  const int dim = large.dim();
  if (dim != 2) throw Error(ErrorCode::unsupported_dimension, "coupling figures support d=2 only");
  const auto sites = large.sorted_sites();
  const Canvas c = make_canvas(dim, sites);
  std::ostringstream o;
  open_document(o, c, "Coupled IDLA forests");

  const std::set<Site> red(report.red.begin(), report.red.end());
  const std::set<Site> blue(report.blue.begin(), report.blue.end());
  const std::set<Edge> green(report.green_edges.begin(), report.green_edges.end());
  for (const auto& p : large.order()) {
    if (red.count(p.site)) site_rect(o, c, p.site, "site red", kRed);
    else if (blue.count(p.site)) site_rect(o, c, p.site, "site blue", kBlue);
    else site_rect(o, c, p.site, "site common", kCommon);
  }
  for (const auto& p : large.order()) {
    if (p.parent < 0) continue;
    const Edge e{large.at(static_cast<std::size_t>(p.parent)).site, p.site};
    if (green.count(e)) edge_line(o, c, e.from, e.to, "edge green", kGreen);
    else edge_line(o, c, e.from, e.to, "edge", kPlainEdge);
  }
  (void)small;
  legend(o, {{kRed, "larger aggregate only"},
             {kBlue, "common, different particle or edge"},
             {kCommon, "common"},
             {kGreen, "edge common to both forests"}});
  o << "</svg>\n";
  return o.str();
}

}  // namespace idla
