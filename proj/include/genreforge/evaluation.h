#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "genreforge/matrix.h"
#include "genreforge/syntax.h"
#include "genreforge/types.h"

namespace genreforge {

// ---------------------------------------------------------------------------
// F1

struct ConfusionCounts {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

// One-vs-rest counts for `positive` over binary labels.
ConfusionCounts confusion(std::span<const int> predicted,
                          std::span<const int> labels, int positive);

// 0/0 -> 0 for precision, recall and F1.
double precision(const ConfusionCounts& c);
double recall(const ConfusionCounts& c);
double f1_score(const ConfusionCounts& c);

struct F1Pair {
  double x = 0.0;  // label 0
  double y = 0.0;  // label 1
  std::size_t support_x = 0;
  std::size_t support_y = 0;
};

// Throws kLengthMismatch when the sizes differ or are zero.
F1Pair f1_pair(std::span<const int> predicted, std::span<const int> labels);

// ---------------------------------------------------------------------------
// Macro averages

using GenrePair = std::pair<double, double>;

struct MacroSummary {
  std::string task;      // e.g. "P/N"
  std::string model_id;
  double macro = 0.0;    // mean over languages of (F1_x + F1_y) / 2
  GenrePair genre_means{0.0, 0.0};
  std::size_t languages = 0;
};

// Throws kInvalidArgument on an empty map.
MacroSummary macro_average(const std::map<std::string, GenrePair>& pairs,
                           std::string task = "", std::string model_id = "");

// ---------------------------------------------------------------------------
// Delta table

enum class Highlight { None, Improve, Decline };

std::string_view to_string(Highlight h);

struct DeltaCell {
  std::string task;
  std::string model_id;
  GenrePair baseline{0.0, 0.0};
  GenrePair augmented{0.0, 0.0};
  // Signed whole percentage points.
  int delta_x = 0;
  int delta_y = 0;
  bool flag_x = false;  // |delta| >= 2 points
  bool flag_y = false;
  // Improve when some delta >= +2 and none <= -2; Decline mirrors it.
  // Pairs that move both ways beyond the threshold are not highlighted.
  Highlight highlight = Highlight::None;
};

// Whole percentage points of (augmented - baseline); ties round away from
// zero after snapping to 1e-6 points, so 0.80 - 0.76 is exactly 4.
int delta_points(double baseline, double augmented);

struct DeltaTable {
  std::string feature;  // label of the augmented run, e.g. "metre"
  std::vector<DeltaCell> cells;

  std::string to_markdown() const;
};

// Pairs summaries by (task, model_id). Throws kKeyMismatch when the key
// sets differ or a key repeats.
DeltaTable delta_table(const std::vector<MacroSummary>& baseline,
                       const std::vector<MacroSummary>& augmented,
                       std::string feature = "");

// ---------------------------------------------------------------------------
// PCA

struct PcaResult {
  Matrix coords;                         // n x k
  std::vector<double> explained_variance;  // k eigenvalues, descending
  Matrix components;                     // k x p, unit rows
  std::vector<double> means;             // p column means
  double total_variance = 0.0;           // trace of the covariance
  bool degenerate = false;               // fewer than k nonzero eigenvalues
  std::string warning;
};

inline constexpr double kPcaTolerance = 1e-10;
inline constexpr int kPcaMaxIterations = 10000;

// Sample covariance (n - 1 denominator), top-k eigenvectors by deflated
// power iteration. The largest-magnitude loading of each component is
// positive. Returns fewer than k components, with a warning, when the
// data has lower rank. Throws kInvalidArgument unless n >= 2 and p >= k.
PcaResult pca_project(const Matrix& data, std::size_t k = 2);

// ---------------------------------------------------------------------------
// Plot data

struct ScatterRow {
  std::string sentence_id;
  double x = 0.0;
  double y = 0.0;
  std::string genre;

  friend bool operator==(const ScatterRow&, const ScatterRow&) = default;
};

struct SyntaxPoint {
  std::string sentence_id;
  SyntaxFeature feature;
  Genre genre = Genre::Drama;
};

// log_plot_coords per record, sorted by sentence_id.
std::vector<ScatterRow> scatter_data(std::vector<SyntaxPoint> points);

// Rows from PCA coordinates (first two columns).
std::vector<ScatterRow> pca_rows(const PcaResult& pca,
                                 const std::vector<std::string>& sentence_ids,
                                 const std::vector<std::string>& genres);

struct PlotLabels {
  std::string title;
  std::string x_label = "x";
  std::string y_label = "y";
};

std::string scatter_csv(const std::vector<ScatterRow>& rows);
std::vector<ScatterRow> parse_scatter_csv(std::string_view csv);
std::string scatter_svg(const std::vector<ScatterRow>& rows,
                        const PlotLabels& labels = {});

// Writes `<prefix>.csv` and `<prefix>.svg`. Throws kIoFailure.
void emit_plot(const std::vector<ScatterRow>& rows,
               const std::filesystem::path& prefix,
               const PlotLabels& labels = {});

// ---------------------------------------------------------------------------
// Reports

struct EvalReport {
  std::string task;  // Task::id()
  Language language = Language::EN;
  std::string model_id;
  std::string features;  // FeatureSpec label
  F1Pair f1;
  std::string genre_x;
  std::string genre_y;
};

std::string eval_report_json(const EvalReport& report);
EvalReport parse_eval_report(std::string_view json);
EvalReport read_eval_report(const std::filesystem::path& path);
void write_eval_report(const EvalReport& report, const std::filesystem::path& path);

// Groups reports by (task, model_id) and macro-averages over languages.
std::vector<MacroSummary> summarize_reports(const std::vector<EvalReport>& reports);

// All `*.json` reports under `dir`, in path order.
std::vector<EvalReport> read_report_dir(const std::filesystem::path& dir);

}  // namespace genreforge
