#include "metric_lab/io.hpp"

#include <cstdio>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "metric_lab/errors.hpp"

namespace metric_lab {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

std::vector<double> to_doubles(const json& arr, const char* what) {
  if (!arr.is_array()) throw ArgumentError(std::string(what) + " must be an array");
  std::vector<double> out;
  out.reserve(arr.size());
  for (const auto& v : arr) {
    if (!v.is_number()) throw ArgumentError(std::string(what) + " must contain numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

double json_number(const json& v) {
  if (v.is_null()) return std::numeric_limits<double>::infinity();
  return v.get<double>();
}

}  // namespace

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Space space_from_json(const json& doc) {
  if (!doc.is_object()) throw ArgumentError("space document must be a JSON object");
  const std::string metric = doc.value("metric", "euclidean");
  std::size_t dim = 0;
  std::vector<double> coords;
  std::size_t n = 0;
  if (doc.contains("points")) {
    const auto& pts = doc.at("points");
    if (!pts.is_array()) throw ArgumentError("points must be an array of coordinate arrays");
    n = pts.size();
    for (std::size_t i = 0; i < n; ++i) {
      auto c = to_doubles(pts[i], "points[i]");
      if (i == 0) dim = c.size();
      if (c.size() != dim || dim == 0) throw ArgumentError("every point needs the same positive number of coordinates");
      coords.insert(coords.end(), c.begin(), c.end());
    }
  }
  std::vector<double> distances;
  if (metric == "explicit") {
    if (!doc.contains("distances")) throw ArgumentError("explicit metric needs a distances matrix");
    const auto& rows = doc.at("distances");
    if (!rows.is_array()) throw ArgumentError("distances must be an array of rows");
    if (n == 0) n = rows.size();
    if (rows.size() != n) throw ArgumentError("distances must have one row per point");
    for (const auto& row : rows) {
      auto r = to_doubles(row, "distances row");
      if (r.size() != n) throw ArgumentError("distances must be square");
      distances.insert(distances.end(), r.begin(), r.end());
    }
  } else if (metric != "euclidean" && metric != "graph") {
    throw ArgumentError("metric must be euclidean, graph or explicit");
  }
  if (n == 0) throw ArgumentError("space document has no points");

  std::vector<double> weights;
  if (doc.contains("weights")) {
    weights = to_doubles(doc.at("weights"), "weights");
    if (weights.size() != n) throw ArgumentError("weights length does not match point count");
  } else {
    weights.assign(n, 1.0 / static_cast<double>(n));
  }
  std::vector<Edge> edges;
  if (doc.contains("adjacency")) {
    for (const auto& e : doc.at("adjacency")) {
      if (!e.is_array() || e.size() != 2) throw ArgumentError("adjacency entries must be [i, j] pairs");
      const auto u = e[0].get<long long>(), v = e[1].get<long long>();
      if (u < 0 || v < 0 || static_cast<std::size_t>(u) >= n || static_cast<std::size_t>(v) >= n)
        throw ArgumentError("adjacency refers to a missing point");
      edges.push_back({static_cast<PointId>(u), static_cast<PointId>(v)});
    }
  }
  if (metric == "explicit")
    return Space::from_distances(std::move(distances), std::move(weights), std::move(edges), dim, std::move(coords));
  if (dim == 0) throw ArgumentError(metric + " metric needs point coordinates");
  if (metric == "graph" && edges.empty()) throw ArgumentError("graph metric needs adjacency");
  return Space::from_coordinates(dim, std::move(coords), std::move(weights), std::move(edges),
                                 metric == "graph" ? MetricKind::graph : MetricKind::euclidean);
}

ojson space_to_json(const Space& space) {
  ojson doc;
  const std::size_t n = space.size();
  if (space.has_coordinates()) {
    ojson pts = ojson::array();
    for (PointId i = 0; i < n; ++i) {
      const auto c = space.coordinate(i);
      pts.push_back(std::vector<double>(c.begin(), c.end()));
    }
    doc["points"] = std::move(pts);
  }
  doc["weights"] = std::vector<double>(space.weights().begin(), space.weights().end());
  ojson adj = ojson::array();
  for (const auto& e : space.edges()) adj.push_back({e.u, e.v});
  doc["adjacency"] = std::move(adj);
  switch (space.metric()) {
    case MetricKind::euclidean: doc["metric"] = "euclidean"; break;
    case MetricKind::graph: doc["metric"] = "graph"; break;
    case MetricKind::explicit_matrix: {
      doc["metric"] = "explicit";
      ojson rows = ojson::array();
      for (PointId i = 0; i < n; ++i) {
        const auto r = space.distance_row(i);
        rows.push_back(std::vector<double>(r.begin(), r.end()));
      }
      doc["distances"] = std::move(rows);
      break;
    }
  }
  return doc;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot write " + path.string());
  out << text;
}

json read_json_file(const std::filesystem::path& path) {
  try {
    return json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw ArgumentError(path.string() + ": " + e.what());
  }
}

void write_distance_matrix(const std::filesystem::path& path, std::span<const double> distances) {
  std::string bytes(distances.size() * 8, '\0');
  for (std::size_t i = 0; i < distances.size(); ++i) {
    const auto bits = std::bit_cast<std::uint64_t>(distances[i]);
    for (int b = 0; b < 8; ++b) bytes[i * 8 + b] = static_cast<char>((bits >> (8 * b)) & 0xff);
  }
  write_text_file(path, bytes);
}

std::optional<std::vector<double>> read_distance_matrix(const std::filesystem::path& path, std::size_t n) {
  std::error_code ec;
  if (!std::filesystem::exists(path, ec) || std::filesystem::file_size(path, ec) != n * n * 8) return std::nullopt;
  const std::string bytes = read_text_file(path);
  std::vector<double> out(n * n);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[i * 8 + b])) << (8 * b);
    out[i] = std::bit_cast<double>(bits);
  }
  return out;
}

std::optional<std::filesystem::path> cache_directory() {
  const char* dir = std::getenv(kCacheEnvVar);
  if (!dir || !*dir) return std::nullopt;
  return std::filesystem::path(dir);
}

Space with_distance_cache(const std::string& key, const std::function<Space()>& build) {
  const auto dir = cache_directory();
  Space space = build();
  if (!dir || space.size() > kDefaultPointBudget) return space;
  const auto path = *dir / (hex64(fnv1a(key)) + ".dist");
  if (auto cached = read_distance_matrix(path, space.size())) {
    const auto c = space.coordinates();
    const auto e = space.edges();
    return Space::from_distances(std::move(*cached), std::vector<double>(space.weights().begin(), space.weights().end()),
                                 std::vector<Edge>(e.begin(), e.end()), space.dim(),
                                 std::vector<double>(c.begin(), c.end()), space.metric());
  }
  std::filesystem::create_directories(*dir);
  write_distance_matrix(path, space.distances());
  return space;
}

void write_kernel(const std::filesystem::path& path, const RoughKernelMatrix& kernel) {
  write_distance_matrix(path, kernel.values);
  ojson side;
  side["nu"] = kernel.nu_used;
  side["size_constant"] = kernel.size_constant;
  side["null_residual"] = kernel.shell_null_residual;
  side["pattern"] = to_string(kernel.pattern);
  side["seed"] = kernel.seed;
  side["n"] = kernel.n;
  side["projected"] = kernel.projected;
  write_text_file(path.string() + ".json", side.dump(2) + "\n");
}

ScalarField field_from_json(const Space& space, const json& doc) {
  const json& arr = doc.is_object() && doc.contains("values") ? doc.at("values") : doc;
  return ScalarField(space, to_doubles(arr, "field values"));
}

ScalarField field_from_csv(const Space& space, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ArgumentError("field CSV is empty");
  const std::size_t n = space.size();
  std::vector<double> values(n, 0.0);
  std::vector<bool> seen(n, false);
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ArgumentError("field CSV row " + std::to_string(row) + " needs point_id,value");
    std::size_t id = 0;
    double v = 0.0;
    try {
      id = std::stoul(line.substr(0, comma));
      v = std::stod(line.substr(comma + 1));
    } catch (const std::exception&) {
      throw ArgumentError("field CSV row " + std::to_string(row) + " is not numeric");
    }
    if (id >= n || seen[id]) throw ArgumentError("field CSV row " + std::to_string(row) + " has a bad or repeated point id");
    seen[id] = true;
    values[id] = v;
  }
  for (std::size_t i = 0; i < n; ++i)
    if (!seen[i]) throw ArgumentError("field CSV misses point " + std::to_string(i));
  return ScalarField(space, std::move(values));
}

ScalarField read_field_file(const Space& space, const std::filesystem::path& path) {
  if (path.extension() == ".csv") return field_from_csv(space, read_text_file(path));
  return field_from_json(space, read_json_file(path));
}

std::string field_to_csv(const ScalarField& f) {
  std::string out = "point_id,value\n";
  for (std::size_t i = 0; i < f.size(); ++i) out += std::to_string(i) + "," + format_double(f[i]) + "\n";
  return out;
}

ojson report_to_json(const InequalityReport& report) {
  ojson doc;
  doc["schema_version"] = kReportSchemaVersion;
  doc["inequality_id"] = to_string(report.id);
  doc["exploratory"] = report.exploratory;
  doc["empirical_constant"] = report.empirical_constant;
  doc["skipped_points"] = report.skipped;
  doc["violations"] = report.violations;
  doc["violating_points"] = report.violating_points;
  doc["zero_tolerance"] = report.zero_tolerance;
  doc["seed"] = report.seed;
  doc["params"] = report.params;
  doc["notes"] = report.notes;
  doc["lhs"] = report.lhs;
  doc["rhs"] = report.rhs;
  return doc;
}

InequalityReport report_from_json(const json& doc) {
  InequalityReport r;
  try {
    if (doc.at("schema_version").get<int>() != kReportSchemaVersion) throw ArgumentError("unsupported report schema version");
    r.id = parse_inequality_id(doc.at("inequality_id").get<std::string>());
    r.exploratory = doc.at("exploratory").get<bool>();
    r.empirical_constant = json_number(doc.at("empirical_constant"));
    r.skipped = doc.at("skipped_points").get<std::size_t>();
    r.violations = doc.at("violations").get<std::size_t>();
    r.violating_points = doc.at("violating_points").get<std::vector<std::size_t>>();
    r.zero_tolerance = doc.at("zero_tolerance").get<double>();
    r.seed = doc.at("seed").get<std::uint64_t>();
    r.params = ojson::parse(doc.at("params").dump());
    r.notes = doc.at("notes").get<std::vector<std::string>>();
    for (const auto& v : doc.at("lhs")) r.lhs.push_back(json_number(v));
    for (const auto& v : doc.at("rhs")) r.rhs.push_back(json_number(v));
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("malformed report: ") + e.what());
  }
  return r;
}

std::string report_to_csv(const InequalityReport& report) {
  std::string out = "point_id,lhs,rhs,ratio\n";
  const auto ratios = report.ratios();
  for (std::size_t i = 0; i < report.lhs.size(); ++i)
    out += std::to_string(i) + "," + format_double(report.lhs[i]) + "," + format_double(report.rhs[i]) + "," +
           format_double(ratios[i]) + "\n";
  return out;
}

std::string report_summary_line(const std::string& name, const InequalityReport& report) {
  std::ostringstream os;
  os << name << ": " << to_string(report.id) << " constant=" << format_double(report.empirical_constant);
  if (report.params.contains("certificate")) {
    const auto& c = report.params.at("certificate");
    os << " window=[" << format_double(c.at("r_min").get<double>()) << ", "
       << format_double(c.at("r_max").get<double>()) << "] nu=" << format_double(c.at("nu_hat").get<double>())
       << " condition=" << format_double(c.at("condition_value").get<double>());
    os << (c.at("condition_holds").get<bool>() ? " condition holds" : " condition fails");
    if (report.exploratory) os << " exploratory (condition 2^{1-ν}c2/c1 ≥ 1)";
  }
  os << " skipped=" << report.skipped << " violations=" << report.violations;
  return os.str();
}

}  // namespace metric_lab
