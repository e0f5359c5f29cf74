#include <algorithm>
#include <atomic>
#include <cstdio>
#include <limits>
#include <map>
#include <thread>

#include "binary_io.hpp"
#include "scimap/analysis.hpp"
#include "scimap/error.hpp"
#include "scimap/serialize.hpp"

namespace scimap {

MapArtifact build_map(const PcaModel& model, const EmbeddingStore& store, const Corpus& corpus,
                      const SubjectCenters& centers, const MapOptions& opt) {
  MapArtifact map;
  std::map<std::string, std::vector<Point2>> by_subject;
  for (const auto& record : corpus) {
    const auto pos = store.position(record.id);
    if (!pos) continue;
    const Point2 p = project_2d(model, store.vector(*pos));
    map.points.push_back({record.id, p});
    for (const auto& s : effective_subjects(record, opt.centers)) by_subject[s].push_back(p);
  }

  for (const auto& [name, c] : centers.subjects)
    map.centers.push_back({name, project_2d(model, std::span<const double>(c.center)), c.member_count});

  std::vector<const MapCenter*> by_size;
  for (const auto& c : map.centers) by_size.push_back(&c);
  std::stable_sort(by_size.begin(), by_size.end(),
                   [](const MapCenter* a, const MapCenter* b) { return a->member_count > b->member_count; });
  for (std::size_t i = 0; i < by_size.size() && i < opt.label_count; ++i) map.labels.push_back(by_size[i]->subject);

  // Contour the largest subjects first; output keeps that order.
  std::vector<std::string> kde_subjects;
  for (const auto* c : by_size) {
    if (opt.max_kde_subjects != 0 && kde_subjects.size() >= opt.max_kde_subjects) break;
    if (by_subject.count(c->subject)) kde_subjects.push_back(c->subject);
  }
  std::vector<KdeOutcome> outcomes(kde_subjects.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < kde_subjects.size();)
      outcomes[i] = kde_hdr_contours(by_subject.at(kde_subjects[i]), opt.kde);
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min(opt.threads, kde_subjects.size()));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
  }
  for (std::size_t i = 0; i < kde_subjects.size(); ++i) {
    if (outcomes[i].result) {
      map.contours.push_back({kde_subjects[i], outcomes[i].result->bandwidth_x, outcomes[i].result->bandwidth_y,
                              std::move(outcomes[i].result->levels)});
    } else {
      map.notices.push_back(kde_subjects[i] + ": " + outcomes[i].notice);
    }
  }
  return map;
}

MapFormat parse_map_format(std::string_view name) {
  if (name == "svg") return MapFormat::Svg;
  if (name == "json") return MapFormat::Json;
  if (name == "csv") return MapFormat::Csv;
  throw Error(ErrorKind::Config, "unknown map format '" + std::string(name) + "' (expected svg, json, csv)");
}

namespace {

std::string fixed(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

}  // namespace

std::string render_map_svg(const MapArtifact& a) {
  constexpr double kWidth = 1000.0, kMargin = 40.0;
  double minx = std::numeric_limits<double>::infinity(), maxx = -minx, miny = minx, maxy = -minx;
  auto extend = [&](Point2 p) {
    minx = std::min(minx, p.x);
    maxx = std::max(maxx, p.x);
    miny = std::min(miny, p.y);
    maxy = std::max(maxy, p.y);
  };
  for (const auto& c : a.centers) extend(c.position);
  for (const auto& sc : a.contours)
    for (const auto& l : sc.levels)
      for (const auto& r : l.rings)
        for (const auto& p : r) extend(p);
  if (!(minx <= maxx)) minx = maxx = miny = maxy = 0.0;
  const double span = std::max({maxx - minx, maxy - miny, 1e-9});
  const double scale = (kWidth - 2 * kMargin) / span;
  const double height = 2 * kMargin + (maxy - miny) * scale;
  // SVG y grows downwards.
  auto sx = [&](double x) { return kMargin + (x - minx) * scale; };
  auto sy = [&](double y) { return height - kMargin - (y - miny) * scale; };

  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + fixed(kWidth) + "\" height=\"" +
         fixed(height) + "\" viewBox=\"0 0 " + fixed(kWidth) + " " + fixed(height) + "\">\n";
  out += "<rect x=\"0\" y=\"0\" width=\"" + fixed(kWidth) + "\" height=\"" + fixed(height) + "\" fill=\"white\"/>\n";

  out += "<g id=\"contours\" fill=\"none\" stroke-width=\"1\">\n";
  for (std::size_t s = 0; s < a.contours.size(); ++s) {
    const auto& sc = a.contours[s];
    const char* color = kPalette[s % std::size(kPalette)];
    for (const auto& l : sc.levels) {
      std::string d;
      for (const auto& r : l.rings) {
        for (std::size_t i = 0; i < r.size(); ++i) d += (i == 0 ? "M" : "L") + fixed(sx(r[i].x)) + "," + fixed(sy(r[i].y)) + " ";
        d += "Z ";
      }
      if (!d.empty()) d.pop_back();
      out += "<path data-subject=\"" + xml_escape(sc.subject) + "\" data-mass=\"" + format_number(l.mass) +
             "\" stroke=\"" + color + "\" d=\"" + d + "\"/>\n";
    }
  }
  out += "</g>\n<g id=\"centers\" fill=\"black\">\n";
  for (const auto& c : a.centers)
    out += "<circle cx=\"" + fixed(sx(c.position.x)) + "\" cy=\"" + fixed(sy(c.position.y)) + "\" r=\"3\"><title>" +
           xml_escape(c.subject) + "</title></circle>\n";
  out += "</g>\n<g id=\"labels\" font-family=\"sans-serif\" font-size=\"11\">\n";
  for (const auto& label : a.labels) {
    auto it = std::find_if(a.centers.begin(), a.centers.end(), [&](const MapCenter& c) { return c.subject == label; });
    if (it == a.centers.end()) continue;
    out += "<text x=\"" + fixed(sx(it->position.x) + 5) + "\" y=\"" + fixed(sy(it->position.y) - 5) + "\">" +
           xml_escape(label) + "</text>\n";
  }
  out += "</g>\n</svg>\n";
  return out;
}

std::string render_map_json(const MapArtifact& a) { return to_json(a).dump(1) + "\n"; }

std::string render_map_csv(const MapArtifact& a) {
  std::string out = "kind,label,x,y\n";
  for (const auto& p : a.points)
    out += "point," + csv_field(p.id) + "," + format_number(p.position.x) + "," + format_number(p.position.y) + "\n";
  for (const auto& c : a.centers)
    out += "center," + csv_field(c.subject) + "," + format_number(c.position.x) + "," + format_number(c.position.y) + "\n";
  return out;
}

void export_map(const MapArtifact& a, MapFormat format, const std::string& path) {
  switch (format) {
    case MapFormat::Svg: detail::write_file(path, render_map_svg(a)); return;
    case MapFormat::Json: detail::write_file(path, render_map_json(a)); return;
    case MapFormat::Csv: detail::write_file(path, render_map_csv(a)); return;
  }
}

}  // namespace scimap
