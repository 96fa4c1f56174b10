#include "adcprune/report.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "adcprune/explore.hpp"
#include "json.hpp"

namespace adcprune {
namespace {

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

std::string xml_escape(const std::string& s) {
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

std::string cell(const std::optional<FrontPoint>& p) {
  if (!p) return "-";
  const double gain = p->normalized_area > 0 ? 1.0 / p->normalized_area : 0.0;
  std::string text = fixed(100.0 * p->accuracy, 1) + "% @ " + fixed(p->normalized_area, 3);
  text += p->normalized_area > 0 ? " (" + fixed(gain, 1) + "x)" : " (inf)";
  return text;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace

RunSummary load_run_summary(const std::filesystem::path& run_dir) {
  const auto path = run_dir / "pareto.json";
  std::ifstream in(path);
  if (!in) throw std::runtime_error("no run artifact at " + path.string());
  const auto j = nlohmann::json::parse(in);
  RunSummary run;
  run.dir = run_dir;
  run.name = j.at("dataset").get<std::string>();
  run.baseline_accuracy = j.at("baseline").at("accuracy").get<double>();
  run.conventional_area = j.at("conventional_area").get<double>();
  for (const auto& p : j.at("points")) {
    run.points.push_back({p.at("id").get<std::size_t>(), p.at("accuracy").get<double>(),
                          p.at("area_normalized_to_baseline").get<double>()});
  }
  return run;
}

std::vector<FrontPoint> staircase(std::vector<FrontPoint> points) {
  std::stable_sort(points.begin(), points.end(), [](const FrontPoint& a, const FrontPoint& b) {
    if (a.normalized_area != b.normalized_area) return a.normalized_area < b.normalized_area;
    return a.accuracy > b.accuracy;
  });
  std::vector<FrontPoint> front;
  for (const auto& p : points) {
    if (front.empty() || p.accuracy > front.back().accuracy) front.push_back(p);
  }
  return front;
}

std::optional<FrontPoint> best_within_loss(const RunSummary& run, double max_loss) {
  std::optional<FrontPoint> best;
  const double floor = run.baseline_accuracy - max_loss - 1e-12;
  for (const auto& p : run.points) {
    if (p.accuracy < floor) continue;
    if (!best || p.normalized_area < best->normalized_area ||
        (p.normalized_area == best->normalized_area && p.accuracy > best->accuracy)) {
      best = p;
    }
  }
  return best;
}

std::string staircase_csv(const std::vector<FrontPoint>& front) {
  std::string out = "normalized_area,accuracy\n";
  for (std::size_t i = 0; i < front.size(); ++i) {
    if (i > 0) {
      out += format_double(front[i].normalized_area) + "," + format_double(front[i - 1].accuracy) + "\n";
    }
    out += format_double(front[i].normalized_area) + "," + format_double(front[i].accuracy) + "\n";
  }
  return out;
}

std::string render_svg(const RunSummary& run) {
  constexpr double kW = 640, kH = 420, kLeft = 70, kRight = 20, kTop = 40, kBottom = 60;
  const double plot_w = kW - kLeft - kRight;
  const double plot_h = kH - kTop - kBottom;

  double x_max = 1.0;
  double y_min = run.baseline_accuracy;
  double y_max = run.baseline_accuracy;
  for (const auto& p : run.points) {
    x_max = std::max(x_max, p.normalized_area);
    y_min = std::min(y_min, p.accuracy);
    y_max = std::max(y_max, p.accuracy);
  }
  y_min = std::max(0.0, std::floor(y_min * 20.0) / 20.0);
  y_max = std::min(1.0, std::ceil(y_max * 20.0) / 20.0);
  if (y_max - y_min < 0.05) y_min = std::max(0.0, y_max - 0.05);
  if (y_max <= y_min) y_max = y_min + 0.05;
  auto sx = [&](double a) { return kLeft + plot_w * a / x_max; };
  auto sy = [&](double acc) { return kTop + plot_h * (1.0 - (acc - y_min) / (y_max - y_min)); };

  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
     << xml_escape(run.name) << ": accuracy vs normalized area</text>\n";
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w << "\" height=\"" << plot_h
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 5; ++t) {
    const double a = x_max * t / 5.0;
    os << "<line x1=\"" << sx(a) << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << sx(a) << "\" y2=\""
       << kTop + plot_h + 5 << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << sx(a) << "\" y=\"" << kTop + plot_h + 20 << "\" text-anchor=\"middle\">"
       << fixed(a, 2) << "</text>\n";
    const double acc = y_min + (y_max - y_min) * t / 5.0;
    os << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << sy(acc) << "\" x2=\"" << kLeft << "\" y2=\"" << sy(acc)
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << kLeft - 8 << "\" y=\"" << sy(acc) + 4 << "\" text-anchor=\"end\">"
       << fixed(100.0 * acc, 1) << "</text>\n";
  }
  os << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kH - 15
     << "\" text-anchor=\"middle\">area normalized to conventional ADCs</text>\n";
  os << "<text transform=\"translate(18," << kTop + plot_h / 2
     << ") rotate(-90)\" text-anchor=\"middle\">accuracy (%)</text>\n";

  // Loss bands relative to the baseline accuracy.
  for (double loss : {0.01, 0.05}) {
    const double acc = run.baseline_accuracy - loss;
    if (acc < y_min) continue;
    os << "<line x1=\"" << kLeft << "\" y1=\"" << sy(acc) << "\" x2=\"" << kLeft + plot_w << "\" y2=\"" << sy(acc)
       << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
  }
  os << "<line x1=\"" << kLeft << "\" y1=\"" << sy(run.baseline_accuracy) << "\" x2=\"" << kLeft + plot_w
     << "\" y2=\"" << sy(run.baseline_accuracy) << "\" stroke=\"black\" stroke-dasharray=\"1 2\"/>\n";

  const auto front = staircase(run.points);
  if (!front.empty()) {
    os << "<polyline fill=\"none\" stroke=\"steelblue\" points=\"";
    for (std::size_t i = 0; i < front.size(); ++i) {
      if (i > 0) os << sx(front[i].normalized_area) << ',' << sy(front[i - 1].accuracy) << ' ';
      os << sx(front[i].normalized_area) << ',' << sy(front[i].accuracy) << ' ';
    }
    os << "\"/>\n";
  }
  for (const auto& p : run.points) {
    os << "<circle cx=\"" << sx(p.normalized_area) << "\" cy=\"" << sy(p.accuracy)
       << "\" r=\"3.5\" fill=\"crimson\"><title>#" << p.id << " acc " << fixed(100.0 * p.accuracy, 2)
       << "% area " << fixed(p.normalized_area, 4) << "</title></circle>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string summary_table(const std::vector<RunSummary>& runs) {
  const std::vector<std::string> header{"dataset", "points", "baseline acc", "best <=1% loss", "best <=5% loss"};
  std::vector<std::vector<std::string>> rows;
  for (const auto& run : runs) {
    rows.push_back({run.name, std::to_string(run.points.size()), fixed(100.0 * run.baseline_accuracy, 1) + "%",
                    cell(best_within_loss(run, 0.01)), cell(best_within_loss(run, 0.05))});
  }
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& r : rows) width[c] = std::max(width[c], r[c].size());
  }
  std::ostringstream os;
  auto line = [&](const std::vector<std::string>& r) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      os << (c == 0 ? "" : "  ") << std::left << std::setw(static_cast<int>(width[c])) << r[c];
    }
    os << "\n";
  };
  line(header);
  std::vector<std::string> rule;
  for (std::size_t w : width) rule.emplace_back(w, '-');
  line(rule);
  for (const auto& r : rows) line(r);
  return os.str();
}

std::string write_reports(const std::vector<std::filesystem::path>& run_dirs) {
  if (run_dirs.empty()) throw std::invalid_argument("report needs at least one run directory");
  std::vector<RunSummary> runs;
  for (const auto& dir : run_dirs) runs.push_back(load_run_summary(dir));
  for (const auto& run : runs) {
    write_text(run.dir / "pareto.svg", render_svg(run));
    write_text(run.dir / "front.csv", staircase_csv(staircase(run.points)));
    write_text(run.dir / "summary.txt", summary_table({run}));
  }
  return summary_table(runs);
}

}  // namespace adcprune
