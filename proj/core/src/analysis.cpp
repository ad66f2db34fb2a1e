#include "scengen/analysis.hpp"

#include <cmath>
#include <stdexcept>

#include "scengen/artifact.hpp"
#include "scengen/csv.hpp"

namespace scengen {

RmseReport rmse_report(const std::vector<Scenario>& originals,
                       const std::vector<Scenario>& reconstructions) {
  if (originals.empty()) throw std::invalid_argument("rmse_report: empty input");
  if (originals.size() != reconstructions.size())
    throw std::invalid_argument("rmse_report: set sizes differ");

  double sse[4] = {0.0, 0.0, 0.0, 0.0};  // x1, y1, x2, y2
  long long samples = 0;
  for (std::size_t i = 0; i < originals.size(); ++i) {
    const auto& a = originals[i].positions;
    const auto& b = reconstructions[i].positions;
    if (a.rows() != b.rows() || a.cols() != 4 || b.cols() != 4)
      throw std::invalid_argument("rmse_report: shape mismatch at pair " +
                                  std::to_string(i));
    for (int c = 0; c < 4; ++c) sse[c] += (a.col(c) - b.col(c)).squaredNorm();
    samples += a.rows();
  }
  const double n = static_cast<double>(samples);
  RmseReport r;
  r.longitudinal_v1 = std::sqrt(sse[0] / n);
  r.lateral_v1 = std::sqrt(sse[1] / n);
  r.longitudinal_v2 = std::sqrt(sse[2] / n);
  r.lateral_v2 = std::sqrt(sse[3] / n);
  r.longitudinal_total = std::sqrt((sse[0] + sse[2]) / (2.0 * n));
  r.lateral_total = std::sqrt((sse[1] + sse[3]) / (2.0 * n));
  return r;
}

TraversalGrid latent_traversal(TransformerCvae& model, const NormalizationStats& norm,
                               const RoundaboutGeometry& geom, int condition,
                               int dimension, int steps, double dt) {
  if (dimension < 0 || dimension >= model.config().latent_dim)
    throw std::invalid_argument("latent_traversal: dimension out of range");
  model.vocabulary_row(condition);  // unknown condition throws

  constexpr int kCount = 5;
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(kCount, model.config().latent_dim);
  for (int i = 0; i < kCount; ++i) z(i, dimension) = kTraversalValues[i];
  const std::vector<int> cats(kCount, condition);
  const Eigen::MatrixXd decoded = model.decode(z, cats, steps);

  TraversalGrid grid;
  grid.dimension = dimension;
  grid.condition = condition;
  for (int i = 0; i < kCount; ++i) {
    TraversalEntry e;
    e.value = kTraversalValues[i];
    e.scenario.positions =
        invert_normalization(decoded.middleRows(i * steps, steps), norm);
    e.scenario.condition_id = condition;
    e.scenario.dt = dt;
    const Eigen::MatrixXd p1 = e.scenario.positions.leftCols(2);
    const Eigen::MatrixXd p2 = e.scenario.positions.rightCols(2);
    e.speed1 = velocity_profile(p1, dt).rowwise().norm();
    e.speed2 = velocity_profile(p2, dt).rowwise().norm();
    e.inside1 = inside_roundabout_mask(p1, geom);
    e.inside2 = inside_roundabout_mask(p2, geom);
    grid.entries.push_back(std::move(e));
  }
  return grid;
}

namespace {

PetHistogram make_histogram(const std::vector<KpiRow>& rows, double width, int bins) {
  PetHistogram h;
  h.bin_width = width;
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  for (const auto& r : rows) {
    if (!r.result.pet) {
      ++h.undefined;
      continue;
    }
    ++h.defined;
    auto bin = static_cast<std::size_t>(*r.result.pet / width);
    if (bin >= h.counts.size()) bin = h.counts.size() - 1;  // top edge inclusive
    ++h.counts[bin];
  }
  return h;
}

std::string opt_field(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

}  // namespace

KpiComparison kpi_distribution_compare(const std::vector<KpiRow>& set_a,
                                       const std::vector<KpiRow>& set_b,
                                       double pet_bin_width) {
  if (set_a.empty() || set_b.empty())
    throw std::invalid_argument("kpi comparison: empty set");
  if (!(pet_bin_width > 0.0))
    throw std::invalid_argument("kpi comparison: bin width must be positive");

  double max_pet = 0.0;
  bool any = false;
  for (const auto* set : {&set_a, &set_b})
    for (const auto& r : *set)
      if (r.result.pet) {
        max_pet = std::max(max_pet, *r.result.pet);
        any = true;
      }
  const int bins = any ? static_cast<int>(max_pet / pet_bin_width) + 1 : 1;

  KpiComparison out;
  out.hist_a = make_histogram(set_a, pet_bin_width, bins);
  out.hist_b = make_histogram(set_b, pet_bin_width, bins);
  for (const auto& r : set_a)
    out.scatter.push_back({"a", r.scenario_id, r.result.pet, r.result.min_ttc});
  for (const auto& r : set_b)
    out.scatter.push_back({"b", r.scenario_id, r.result.pet, r.result.min_ttc});
  return out;
}

void write_rmse_csv(const std::filesystem::path& path, const RmseReport& report) {
  write_csv(path, {}, {"metric", "value"},
            {{"longitudinal_v1", format_double(report.longitudinal_v1)},
             {"longitudinal_v2", format_double(report.longitudinal_v2)},
             {"longitudinal_total", format_double(report.longitudinal_total)},
             {"lateral_v1", format_double(report.lateral_v1)},
             {"lateral_v2", format_double(report.lateral_v2)},
             {"lateral_total", format_double(report.lateral_total)}});
}

RmseReport read_rmse_csv(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  RmseReport r;
  for (const auto& row : table.rows) {
    const double v = std::stod(row[1]);
    if (row[0] == "longitudinal_v1") r.longitudinal_v1 = v;
    else if (row[0] == "longitudinal_v2") r.longitudinal_v2 = v;
    else if (row[0] == "longitudinal_total") r.longitudinal_total = v;
    else if (row[0] == "lateral_v1") r.lateral_v1 = v;
    else if (row[0] == "lateral_v2") r.lateral_v2 = v;
    else if (row[0] == "lateral_total") r.lateral_total = v;
  }
  return r;
}

void write_pet_histogram_csv(const std::filesystem::path& path,
                             const PetHistogram& hist) {
  std::vector<std::string> comments{
      "# defined=" + std::to_string(hist.defined),
      "# undefined=" + std::to_string(hist.undefined)};
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < hist.counts.size(); ++i)
    rows.push_back({format_double(static_cast<double>(i) * hist.bin_width),
                    format_double(static_cast<double>(i + 1) * hist.bin_width),
                    std::to_string(hist.counts[i])});
  write_csv(path, comments, {"bin_start", "bin_end", "count"}, rows);
}

void write_scatter_csv(const std::filesystem::path& path,
                       const std::vector<ScatterRow>& rows) {
  std::vector<std::vector<std::string>> out;
  out.reserve(rows.size());
  for (const auto& r : rows)
    out.push_back({r.set, r.scenario_id, opt_field(r.pet), opt_field(r.min_ttc)});
  write_csv(path, {}, {"set", "scenario_id", "pet", "min_ttc"}, out);
}

void write_traversal_csv(const std::filesystem::path& path, const TraversalGrid& grid) {
  if (grid.entries.empty())
    throw std::invalid_argument("traversal csv: empty grid");
  std::string values = "# values=";
  for (std::size_t i = 0; i < grid.entries.size(); ++i) {
    if (i) values += ',';
    values += format_double(grid.entries[i].value);
  }
  std::vector<std::string> comments{"# dimension=" + std::to_string(grid.dimension),
                                    "# condition=" + std::to_string(grid.condition),
                                    values};

  std::vector<std::string> header{"frame"};
  for (std::size_t i = 0; i < grid.entries.size(); ++i) {
    const std::string p = "v" + std::to_string(i) + "_";
    for (const char* f : {"x1", "y1", "x2", "y2", "speed1", "speed2"})
      header.push_back(p + f);
  }

  const int steps = grid.entries.front().scenario.steps();
  std::vector<std::vector<std::string>> rows;
  rows.reserve(static_cast<std::size_t>(steps));
  for (int t = 0; t < steps; ++t) {
    std::vector<std::string> row{std::to_string(t)};
    for (const auto& e : grid.entries) {
      for (int c = 0; c < 4; ++c) row.push_back(format_double(e.scenario.positions(t, c)));
      row.push_back(e.inside1[static_cast<std::size_t>(t)] ? format_double(e.speed1(t))
                                                           : std::string());
      row.push_back(e.inside2[static_cast<std::size_t>(t)] ? format_double(e.speed2(t))
                                                           : std::string());
    }
    rows.push_back(std::move(row));
  }
  write_csv(path, comments, header, rows);
}

void write_report_bundle(const std::filesystem::path& dir,
                         const std::optional<RmseReport>& rmse,
                         const KpiComparison& comparison) {
  std::filesystem::create_directories(dir);
  if (rmse) write_rmse_csv(dir / "rmse.csv", *rmse);
  write_pet_histogram_csv(dir / "pet_hist_a.csv", comparison.hist_a);
  write_pet_histogram_csv(dir / "pet_hist_b.csv", comparison.hist_b);
  write_scatter_csv(dir / "pet_vs_ttc.csv", comparison.scatter);
}

}  // namespace scengen
