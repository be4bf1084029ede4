#include "genreforge/evaluation.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "genreforge/error.h"
#include "genreforge/text.h"

namespace genreforge {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// F1

ConfusionCounts confusion(std::span<const int> predicted,
                          std::span<const int> labels, int positive) {
  if (predicted.size() != labels.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                std::to_string(predicted.size()) + " predictions vs " +
                    std::to_string(labels.size()) + " labels");
  }
  ConfusionCounts c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool p = predicted[i] == positive;
    const bool t = labels[i] == positive;
    if (p && t) ++c.tp;
    else if (p) ++c.fp;
    else if (t) ++c.fn;
    else ++c.tn;
  }
  return c;
}

namespace {

double safe_div(double a, double b) { return b == 0.0 ? 0.0 : a / b; }

}  // namespace

double precision(const ConfusionCounts& c) {
  return safe_div(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fp));
}

double recall(const ConfusionCounts& c) {
  return safe_div(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fn));
}

double f1_score(const ConfusionCounts& c) {
  const double p = precision(c);
  const double r = recall(c);
  return safe_div(2.0 * p * r, p + r);
}

F1Pair f1_pair(std::span<const int> predicted, std::span<const int> labels) {
  if (labels.empty() || predicted.size() != labels.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                std::to_string(predicted.size()) + " predictions vs " +
                    std::to_string(labels.size()) + " labels");
  }
  const auto c0 = confusion(predicted, labels, 0);
  const auto c1 = confusion(predicted, labels, 1);
  return {f1_score(c0), f1_score(c1), c0.tp + c0.fn, c1.tp + c1.fn};
}

// ---------------------------------------------------------------------------
// Macro averages

MacroSummary macro_average(const std::map<std::string, GenrePair>& pairs,
                           std::string task, std::string model_id) {
  if (pairs.empty())
    throw Error(ErrorCode::kInvalidArgument, "macro average over no languages");
  MacroSummary s;
  s.task = std::move(task);
  s.model_id = std::move(model_id);
  s.languages = pairs.size();
  double sx = 0.0, sy = 0.0;
  for (const auto& [lang, p] : pairs) {
    sx += p.first;
    sy += p.second;
  }
  const double n = static_cast<double>(pairs.size());
  s.genre_means = {sx / n, sy / n};
  s.macro = (s.genre_means.first + s.genre_means.second) / 2.0;
  return s;
}

// ---------------------------------------------------------------------------
// Delta table

std::string_view to_string(Highlight h) {
  switch (h) {
    case Highlight::None: return "none";
    case Highlight::Improve: return "improve";
    case Highlight::Decline: return "decline";
  }
  return "?";
}

int delta_points(double baseline, double augmented) {
  // Table values carry two decimals, so differences like 0.80 - 0.76 land a
  // few ulps off the whole point; snap before rounding.
  const double pts = std::round((augmented - baseline) * 1e8) / 1e6;
  return static_cast<int>(std::round(pts));
}

namespace {

using Key = std::pair<std::string, std::string>;

std::map<Key, const MacroSummary*> index_summaries(
    const std::vector<MacroSummary>& summaries, const char* side) {
  std::map<Key, const MacroSummary*> out;
  for (const auto& s : summaries) {
    if (!out.emplace(Key{s.task, s.model_id}, &s).second) {
      throw Error(ErrorCode::kKeyMismatch, std::string("duplicate ") + side +
                                               " key (" + s.task + ", " +
                                               s.model_id + ")");
    }
  }
  return out;
}

std::string two_decimals(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string signed_points(int pts) {
  if (pts == 0) return "–";
  return (pts > 0 ? "+" : "") + std::to_string(pts) + "%";
}

}  // namespace

DeltaTable delta_table(const std::vector<MacroSummary>& baseline,
                       const std::vector<MacroSummary>& augmented,
                       std::string feature) {
  const auto base = index_summaries(baseline, "baseline");
  const auto aug = index_summaries(augmented, "augmented");
  for (const auto& [key, s] : aug) {
    if (!base.count(key)) {
      throw Error(ErrorCode::kKeyMismatch,
                  "no baseline for (" + key.first + ", " + key.second + ")");
    }
  }
  for (const auto& [key, s] : base) {
    if (!aug.count(key)) {
      throw Error(ErrorCode::kKeyMismatch,
                  "no augmented run for (" + key.first + ", " + key.second + ")");
    }
  }

  DeltaTable table;
  table.feature = std::move(feature);
  // Augmented input order, so callers control row order.
  for (const auto& a : augmented) {
    const MacroSummary& b = *base.at(Key{a.task, a.model_id});
    DeltaCell c;
    c.task = a.task;
    c.model_id = a.model_id;
    c.baseline = b.genre_means;
    c.augmented = a.genre_means;
    c.delta_x = delta_points(b.genre_means.first, a.genre_means.first);
    c.delta_y = delta_points(b.genre_means.second, a.genre_means.second);
    c.flag_x = std::abs(c.delta_x) >= 2;
    c.flag_y = std::abs(c.delta_y) >= 2;
    const bool up = c.delta_x >= 2 || c.delta_y >= 2;
    const bool down = c.delta_x <= -2 || c.delta_y <= -2;
    if (up && !down) c.highlight = Highlight::Improve;
    else if (down && !up) c.highlight = Highlight::Decline;
    table.cells.push_back(std::move(c));
  }
  return table;
}

std::string DeltaTable::to_markdown() const {
  std::ostringstream out;
  if (!feature.empty()) out << "### " << feature << "\n\n";
  out << "| Task | Model | Baseline | Augmented | Delta | Highlight |\n";
  out << "|---|---|---|---|---|---|\n";
  for (const auto& c : cells) {
    out << "| " << c.task << " | " << c.model_id << " | "
        << two_decimals(c.baseline.first) << "/" << two_decimals(c.baseline.second)
        << " | " << two_decimals(c.augmented.first) << "/"
        << two_decimals(c.augmented.second) << " | " << signed_points(c.delta_x)
        << " / " << signed_points(c.delta_y) << " | " << to_string(c.highlight)
        << " |\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// PCA

namespace {

std::vector<double> mat_vec(const Matrix& a, const std::vector<double>& v) {
  std::vector<double> out(a.rows, 0.0);
  for (std::size_t i = 0; i < a.rows; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols; ++j) s += a(i, j) * v[j];
    out[i] = s;
  }
  return out;
}

double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// Solves (a - shift*I) x = b by Gaussian elimination with partial pivoting.
// Returns false when a pivot vanishes, i.e. the shift is an exact eigenvalue.
bool shifted_solve(const Matrix& a, double shift, std::vector<double> b,
                   std::vector<double>& x) {
  const std::size_t p = a.rows;
  Matrix m = a;
  for (std::size_t i = 0; i < p; ++i) m(i, i) -= shift;
  for (std::size_t col = 0; col < p; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < p; ++r)
      if (std::abs(m(r, col)) > std::abs(m(piv, col))) piv = r;
    if (m(piv, col) == 0.0) return false;
    if (piv != col) {
      for (std::size_t j = 0; j < p; ++j) std::swap(m(col, j), m(piv, j));
      std::swap(b[col], b[piv]);
    }
    for (std::size_t r = col + 1; r < p; ++r) {
      const double f = m(r, col) / m(col, col);
      for (std::size_t j = col; j < p; ++j) m(r, j) -= f * m(col, j);
      b[r] -= f * b[col];
    }
  }
  x.assign(p, 0.0);
  for (std::size_t i = p; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < p; ++j) s -= m(i, j) * x[j];
    x[i] = s / m(i, i);
  }
  return true;
}

double rayleigh(const Matrix& a, const std::vector<double>& v) {
  const auto av = mat_vec(a, v);
  double s = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) s += v[j] * av[j];
  return s;
}

// A few Rayleigh-quotient iterations polish a power-iteration estimate; the
// power method alone stalls when the eigen-gap is small.
void refine(const Matrix& a, std::vector<double>& v) {
  for (int it = 0; it < 4; ++it) {
    std::vector<double> w;
    if (!shifted_solve(a, rayleigh(a, v), v, w)) return;
    const double nw = norm(w);
    if (!std::isfinite(nw) || nw == 0.0) return;
    double dot = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) dot += w[j] * v[j];
    const double sign = dot < 0.0 ? -1.0 : 1.0;
    double diff = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) {
      w[j] *= sign / nw;
      diff = std::max(diff, std::abs(w[j] - v[j]));
    }
    // Refinement must not jump to another eigenvector.
    if (rayleigh(a, w) < rayleigh(a, v) * (1.0 - 1e-8)) return;
    v = std::move(w);
    if (diff < 1e-15) return;
  }
}

void orient(std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < v.size(); ++j)
    if (std::abs(v[j]) > std::abs(v[best])) best = j;
  if (v[best] < 0.0)
    for (double& x : v) x = -x;
}

}  // namespace

PcaResult pca_project(const Matrix& data, std::size_t k) {
  const std::size_t n = data.rows, p = data.cols;
  if (n < 2) throw Error(ErrorCode::kInvalidArgument, "PCA needs n >= 2 rows");
  if (k < 1 || p < k)
    throw Error(ErrorCode::kInvalidArgument, "PCA needs p >= k >= 1");

  PcaResult r;
  r.means.assign(p, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < p; ++j) r.means[j] += data(i, j);
  for (double& m : r.means) m /= static_cast<double>(n);

  Matrix centered(n, p);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < p; ++j) centered(i, j) = data(i, j) - r.means[j];

  Matrix cov(p, p);
  for (std::size_t a = 0; a < p; ++a) {
    for (std::size_t b = a; b < p; ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += centered(i, a) * centered(i, b);
      s /= static_cast<double>(n - 1);
      cov(a, b) = cov(b, a) = s;
    }
  }
  for (std::size_t j = 0; j < p; ++j) r.total_variance += cov(j, j);

  const double floor = 1e-12 * r.total_variance;
  std::vector<std::vector<double>> comps;
  for (std::size_t c = 0; c < k; ++c) {
    // Start from the deflated covariance row with the largest norm.
    std::vector<double> v;
    double best = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      std::vector<double> row(cov.row(j).begin(), cov.row(j).end());
      const double nr = norm(row);
      if (nr > best) {
        best = nr;
        v = std::move(row);
      }
    }
    if (best <= floor || r.total_variance == 0.0) break;
    for (double& x : v) x /= best;

    double lambda = 0.0;
    for (int it = 0; it < kPcaMaxIterations; ++it) {
      std::vector<double> w = mat_vec(cov, v);
      const double nw = norm(w);
      if (nw == 0.0) break;
      for (double& x : w) x /= nw;
      double diff = 0.0, flip = 0.0;
      for (std::size_t j = 0; j < p; ++j) {
        diff = std::max(diff, std::abs(w[j] - v[j]));
        flip = std::max(flip, std::abs(w[j] + v[j]));
      }
      v = std::move(w);
      if (std::min(diff, flip) < kPcaTolerance) break;
    }
    refine(cov, v);
    lambda = rayleigh(cov, v);
    if (lambda <= floor) break;

    orient(v);
    for (std::size_t a = 0; a < p; ++a)
      for (std::size_t b = 0; b < p; ++b) cov(a, b) -= lambda * v[a] * v[b];
    r.explained_variance.push_back(lambda);
    comps.push_back(std::move(v));
  }

  if (comps.size() < k) {
    r.degenerate = true;
    r.warning = "only " + std::to_string(comps.size()) + " of " +
                std::to_string(k) + " components have nonzero variance";
  }
  r.components = Matrix(comps.size(), p);
  for (std::size_t c = 0; c < comps.size(); ++c)
    std::copy(comps[c].begin(), comps[c].end(), r.components.row(c).begin());
  r.coords = Matrix(n, comps.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < comps.size(); ++c) {
      double s = 0.0;
      for (std::size_t j = 0; j < p; ++j) s += centered(i, j) * comps[c][j];
      r.coords(i, c) = s;
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Plot data

std::vector<ScatterRow> scatter_data(std::vector<SyntaxPoint> points) {
  std::sort(points.begin(), points.end(),
            [](const SyntaxPoint& a, const SyntaxPoint& b) {
              return a.sentence_id < b.sentence_id;
            });
  std::vector<ScatterRow> rows;
  rows.reserve(points.size());
  for (const auto& pt : points) {
    const PlotPoint xy = log_plot_coords(pt.feature);
    rows.push_back({pt.sentence_id, xy.x, xy.y, std::string(to_string(pt.genre))});
  }
  return rows;
}

std::vector<ScatterRow> pca_rows(const PcaResult& pca,
                                 const std::vector<std::string>& sentence_ids,
                                 const std::vector<std::string>& genres) {
  if (sentence_ids.size() != pca.coords.rows || genres.size() != pca.coords.rows)
    throw Error(ErrorCode::kLengthMismatch, "ids/genres do not match PCA rows");
  std::vector<ScatterRow> rows;
  for (std::size_t i = 0; i < pca.coords.rows; ++i) {
    const double x = pca.coords.cols > 0 ? pca.coords(i, 0) : 0.0;
    const double y = pca.coords.cols > 1 ? pca.coords(i, 1) : 0.0;
    rows.push_back({sentence_ids[i], x, y, genres[i]});
  }
  return rows;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Splits one CSV record starting at `pos`; advances past its line break.
std::vector<std::string> csv_record(std::string_view csv, std::size_t& pos) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  while (pos < csv.size()) {
    const char c = csv[pos++];
    if (quoted) {
      if (c == '"') {
        if (pos < csv.size() && csv[pos] == '"') {
          fields.back() += '"';
          ++pos;
        } else {
          quoted = false;
        }
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else if (c == '\n') {
      break;
    } else if (c != '\r') {
      fields.back() += c;
    }
  }
  return fields;
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

std::string genre_color(std::string_view genre) {
  const auto g = parse_genre(genre);
  if (!g) return "#7f7f7f";
  switch (*g) {
    case Genre::Novel: return "#2ca02c";
    case Genre::Poetry: return "#1f77b4";
    case Genre::Drama: return "#d62728";
  }
  return "#7f7f7f";
}

std::string fixed(double v, int digits) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

std::string scatter_csv(const std::vector<ScatterRow>& rows) {
  std::string out = "sentence_id,x,y,genre\n";
  for (const auto& r : rows) {
    out += csv_field(r.sentence_id) + "," + g17(r.x) + "," + g17(r.y) + "," +
           csv_field(r.genre) + "\n";
  }
  return out;
}

std::vector<ScatterRow> parse_scatter_csv(std::string_view csv) {
  std::size_t pos = 0;
  const auto header = csv_record(csv, pos);
  if (header != std::vector<std::string>{"sentence_id", "x", "y", "genre"})
    throw Error(ErrorCode::kParseError, "unexpected scatter CSV header");
  std::vector<ScatterRow> rows;
  std::size_t line = 1;
  while (pos < csv.size()) {
    ++line;
    const auto f = csv_record(csv, pos);
    if (f.size() == 1 && f[0].empty()) continue;
    if (f.size() != 4) {
      throw Error(ErrorCode::kParseError,
                  "line " + std::to_string(line) + ": expected 4 fields");
    }
    try {
      rows.push_back({f[0], std::stod(f[1]), std::stod(f[2]), f[3]});
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::kParseError,
                  "line " + std::to_string(line) + ": bad number");
    }
  }
  return rows;
}

std::string scatter_svg(const std::vector<ScatterRow>& rows,
                        const PlotLabels& labels) {
  constexpr double kW = 800, kH = 600;
  constexpr double left = 70, right = 150, top = 40, bottom = 60;
  const double pw = kW - left - right, ph = kH - top - bottom;

  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (!rows.empty()) {
    xmin = xmax = rows[0].x;
    ymin = ymax = rows[0].y;
    for (const auto& r : rows) {
      xmin = std::min(xmin, r.x);
      xmax = std::max(xmax, r.x);
      ymin = std::min(ymin, r.y);
      ymax = std::max(ymax, r.y);
    }
    if (xmax - xmin < 1e-12) { xmin -= 0.5; xmax += 0.5; }
    if (ymax - ymin < 1e-12) { ymin -= 0.5; ymax += 0.5; }
    const double dx = 0.05 * (xmax - xmin), dy = 0.05 * (ymax - ymin);
    xmin -= dx; xmax += dx; ymin -= dy; ymax += dy;
  }
  auto sx = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  auto sy = [&](double y) { return top + ph - (y - ymin) / (ymax - ymin) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" "
       "viewBox=\"0 0 800 600\">\n";
  o << "<rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" fill=\"white\"/>\n";
  if (!labels.title.empty()) {
    o << "<text x=\"" << left + pw / 2 << "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"16\">"
      << xml_escape(labels.title) << "</text>\n";
  }
  // Axes
  o << "<g stroke=\"black\" stroke-width=\"1\">\n";
  o << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw
    << "\" y2=\"" << top + ph << "\"/>\n";
  o << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left
    << "\" y2=\"" << top + ph << "\"/>\n";
  o << "</g>\n";
  o << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int t = 0; t <= 4; ++t) {
    const double fx = xmin + (xmax - xmin) * t / 4.0;
    const double fy = ymin + (ymax - ymin) * t / 4.0;
    o << "<text x=\"" << fixed(sx(fx), 1) << "\" y=\"" << top + ph + 18
      << "\" text-anchor=\"middle\">" << fixed(fx, 2) << "</text>\n";
    o << "<text x=\"" << left - 6 << "\" y=\"" << fixed(sy(fy) + 4, 1)
      << "\" text-anchor=\"end\">" << fixed(fy, 2) << "</text>\n";
  }
  o << "<text x=\"" << left + pw / 2 << "\" y=\"" << kH - 16
    << "\" text-anchor=\"middle\">" << xml_escape(labels.x_label) << "</text>\n";
  o << "<text x=\"18\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" "
       "transform=\"rotate(-90 18 " << top + ph / 2 << ")\">"
    << xml_escape(labels.y_label) << "</text>\n";
  o << "</g>\n";

  o << "<g fill-opacity=\"0.7\">\n";
  for (const auto& r : rows) {
    o << "<circle cx=\"" << fixed(sx(r.x), 2) << "\" cy=\"" << fixed(sy(r.y), 2)
      << "\" r=\"3\" fill=\"" << genre_color(r.genre) << "\"/>\n";
  }
  o << "</g>\n";

  // Legend: the three genres always, plus anything else that shows up.
  std::vector<std::string> legend = {"Novel", "Poetry", "Drama"};
  std::set<std::string> seen(legend.begin(), legend.end());
  for (const auto& r : rows)
    if (!parse_genre(r.genre) && seen.insert(r.genre).second) legend.push_back(r.genre);
  o << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
  double ly = top + 10;
  for (const auto& g : legend) {
    o << "<rect x=\"" << kW - right + 20 << "\" y=\"" << ly
      << "\" width=\"10\" height=\"10\" fill=\"" << genre_color(g) << "\"/>\n";
    o << "<text x=\"" << kW - right + 36 << "\" y=\"" << ly + 9 << "\">"
      << xml_escape(g) << "</text>\n";
    ly += 20;
  }
  o << "</g>\n</svg>\n";
  return o.str();
}

void emit_plot(const std::vector<ScatterRow>& rows, const fs::path& prefix,
               const PlotLabels& labels) {
  auto write = [](const fs::path& path, const std::string& data) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << data;
    if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + path.string());
  };
  write(fs::path(prefix.string() + ".csv"), scatter_csv(rows));
  write(fs::path(prefix.string() + ".svg"), scatter_svg(rows, labels));
}

// ---------------------------------------------------------------------------
// Reports

std::string eval_report_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["task"] = r.task;
  j["language"] = std::string(to_string(r.language));
  j["model_id"] = r.model_id;
  j["features"] = r.features;
  j["genres"] = {r.genre_x, r.genre_y};
  j["f1"] = {r.f1.x, r.f1.y};
  j["support"] = {r.f1.support_x, r.f1.support_y};
  return j.dump(2) + "\n";
}

EvalReport parse_eval_report(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    EvalReport r;
    r.task = j.at("task").get<std::string>();
    r.language = language_or_throw(j.at("language").get<std::string>());
    r.model_id = j.at("model_id").get<std::string>();
    r.features = j.value("features", std::string("baseline"));
    if (j.contains("genres")) {
      r.genre_x = j["genres"].at(0).get<std::string>();
      r.genre_y = j["genres"].at(1).get<std::string>();
    }
    r.f1.x = j.at("f1").at(0).get<double>();
    r.f1.y = j.at("f1").at(1).get<double>();
    r.f1.support_x = j.at("support").at(0).get<std::size_t>();
    r.f1.support_y = j.at("support").at(1).get<std::size_t>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("report: ") + e.what());
  }
}

EvalReport read_eval_report(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot read " + path.string());
  const std::string data((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
  return parse_eval_report(data);
}

void write_eval_report(const EvalReport& report, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << eval_report_json(report);
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + path.string());
}

std::vector<MacroSummary> summarize_reports(const std::vector<EvalReport>& reports) {
  std::map<Key, std::map<std::string, GenrePair>> groups;
  std::vector<Key> order;
  for (const auto& r : reports) {
    const Key key{r.task, r.model_id};
    auto [it, fresh] = groups.try_emplace(key);
    if (fresh) order.push_back(key);
    const std::string lang(to_string(r.language));
    if (!it->second.emplace(lang, GenrePair{r.f1.x, r.f1.y}).second) {
      throw Error(ErrorCode::kKeyMismatch, "two reports for (" + r.task + ", " +
                                               r.model_id + ", " + lang + ")");
    }
  }
  std::vector<MacroSummary> out;
  for (const auto& key : order)
    out.push_back(macro_average(groups.at(key), key.first, key.second));
  return out;
}

std::vector<EvalReport> read_report_dir(const fs::path& dir) {
  if (!fs::is_directory(dir))
    throw Error(ErrorCode::kIoFailure, "not a directory: " + dir.string());
  std::vector<fs::path> paths;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json") paths.push_back(e.path());
  std::sort(paths.begin(), paths.end());
  std::vector<EvalReport> out;
  for (const auto& p : paths) out.push_back(read_eval_report(p));
  return out;
}

}  // namespace genreforge
