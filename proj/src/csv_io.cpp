#include "rasql/csv_io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace rasql {

using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
  return in;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  return out;
}

double parse_double(const std::string& text) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw std::runtime_error("malformed number '" + text + "'");
  return v;
}

std::uint64_t parse_uint(const std::string& text) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw std::runtime_error("malformed integer '" + text + "'");
  return v;
}

struct CsvDocument {
  std::map<std::string, std::string> meta;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

CsvDocument read_csv(const std::filesystem::path& path, const std::string& kind) {
  auto in = open_in(path);
  CsvDocument doc;
  std::string line;
  if (!std::getline(in, line) || line != "# rasql-" + kind + " v1")
    throw std::runtime_error("'" + path.string() + "' is not a rasql-" + kind + " v1 file");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq != std::string::npos) doc.meta[line.substr(2, eq - 2)] = line.substr(eq + 1);
      continue;
    }
    if (doc.columns.empty()) {
      doc.columns = split(line, ',');
      continue;
    }
    auto fields = split(line, ',');
    if (fields.size() != doc.columns.size())
      throw std::runtime_error("'" + path.string() + "': row has the wrong number of fields");
    doc.rows.push_back(std::move(fields));
  }
  return doc;
}

}  // namespace

void write_limit_csv(const std::filesystem::path& path, const std::vector<QTable>& limits) {
  auto out = open_out(path);
  out << "# rasql-qlimit v1\n";
  out << "phase,z,a,value\n";
  for (std::size_t l = 0; l < limits.size(); ++l)
    for (std::size_t z = 0; z < limits[l].num_states(); ++z)
      for (std::size_t a = 0; a < limits[l].num_actions(); ++a)
        out << l << ',' << z << ',' << a << ',' << format_double(limits[l](z, a)) << '\n';
}

std::vector<QTable> read_limit_csv(const std::filesystem::path& path) {
  const auto doc = read_csv(path, "qlimit");
  std::size_t L = 0, Z = 0, A = 0;
  for (const auto& row : doc.rows) {
    L = std::max<std::size_t>(L, parse_uint(row[0]) + 1);
    Z = std::max<std::size_t>(Z, parse_uint(row[1]) + 1);
    A = std::max<std::size_t>(A, parse_uint(row[2]) + 1);
  }
  if (doc.rows.size() != L * Z * A)
    throw std::runtime_error("'" + path.string() + "': incomplete Q-limit table");
  std::vector<QTable> out(L, QTable(Z, A));
  for (const auto& row : doc.rows)
    out[parse_uint(row[0])](parse_uint(row[1]), parse_uint(row[2])) = parse_double(row[3]);
  return out;
}

void write_run_csv(const std::filesystem::path& path, const RunRecord& run) {
  auto out = open_out(path);
  out << "# rasql-run v1\n";
  out << "# config_digest=" << run.config_digest << '\n';
  out << "# seed=" << run.seed << '\n';
  out << "# steps=" << run.steps << '\n';
  out << "# period=" << run.period << '\n';
  out << "# schedule=" << run.schedule << '\n';
  out << "# visits=";
  for (std::size_t i = 0; i < run.visits.size(); ++i) out << (i ? "," : "") << run.visits[i];
  out << '\n';
  out << "t,phase,z,a,q_value\n";
  for (const auto& snap : run.snapshots)
    for (std::size_t l = 0; l < snap.tables.size(); ++l)
      for (std::size_t z = 0; z < snap.tables[l].num_states(); ++z)
        for (std::size_t a = 0; a < snap.tables[l].num_actions(); ++a)
          out << snap.t << ',' << l << ',' << z << ',' << a << ','
              << format_double(snap.tables[l](z, a)) << '\n';
}

RunRecord read_run_csv(const std::filesystem::path& path) {
  const auto doc = read_csv(path, "run");
  RunRecord run;
  auto meta = [&](const char* key) {
    const auto it = doc.meta.find(key);
    if (it == doc.meta.end())
      throw std::runtime_error("'" + path.string() + "': missing header '" + key + "'");
    return it->second;
  };
  run.config_digest = meta("config_digest");
  run.seed = parse_uint(meta("seed"));
  run.steps = parse_uint(meta("steps"));
  run.period = parse_uint(meta("period"));
  run.schedule = meta("schedule");
  for (const auto& v : split(meta("visits"), ',')) run.visits.push_back(parse_uint(v));

  std::size_t Z = 0, A = 0;
  for (const auto& row : doc.rows) {
    Z = std::max<std::size_t>(Z, parse_uint(row[2]) + 1);
    A = std::max<std::size_t>(A, parse_uint(row[3]) + 1);
  }
  for (const auto& row : doc.rows) {
    const auto t = parse_uint(row[0]);
    if (run.snapshots.empty() || run.snapshots.back().t != t) {
      if (!run.snapshots.empty() && t <= run.snapshots.back().t)
        throw std::runtime_error("'" + path.string() + "': snapshot times must increase");
      run.snapshots.push_back({t, std::vector<QTable>(run.period, QTable(Z, A))});
    }
    const auto l = parse_uint(row[1]);
    if (l >= run.period) throw std::runtime_error("'" + path.string() + "': phase out of range");
    run.snapshots.back().tables[l](parse_uint(row[2]), parse_uint(row[3])) = parse_double(row[4]);
  }
  if (run.snapshots.empty()) throw std::runtime_error("'" + path.string() + "': no snapshots");
  run.final_tables = run.snapshots.back().tables;
  return run;
}

void write_trace_csv(const std::filesystem::path& path, const AggregateTrace& trace) {
  auto out = open_out(path);
  out << "# rasql-trace v1\n";
  out << "phase,z,a,t,lower,median,upper,limit\n";
  for (const auto& s : trace.series)
    for (std::size_t k = 0; k < s.t.size(); ++k)
      out << s.phase << ',' << s.z << ',' << s.a << ',' << s.t[k] << ','
          << format_double(s.lower[k]) << ',' << format_double(s.median[k]) << ','
          << format_double(s.upper[k]) << ',' << format_double(s.limit) << '\n';
}

void write_distribution_csv(const std::filesystem::path& path, const JointDistribution& zeta) {
  auto out = open_out(path);
  out << "# rasql-distribution v1\n";
  out << "s,y,z,a,mass\n";
  const auto& d = zeta.dims;
  for (std::size_t s = 0; s < d.states; ++s)
    for (std::size_t y = 0; y < d.obs; ++y)
      for (std::size_t z = 0; z < d.agent_states; ++z)
        for (std::size_t a = 0; a < d.actions; ++a)
          out << s << ',' << y << ',' << z << ',' << a << ',' << format_double(zeta(s, y, z, a))
              << '\n';
}

json limit_diagnostics(const LimitReport& report) {
  json phases = json::array();
  for (std::size_t l = 0; l < report.period; ++l) {
    const auto& zeta = report.zetas[l];
    json unvisited = json::array();
    for (std::size_t z = 0; z < zeta.dims.agent_states; ++z)
      for (std::size_t a = 0; a < zeta.dims.actions; ++a)
        if (!zeta.supported(z, a)) unvisited.push_back({z, a});
    phases.push_back({{"phase", l},
                      {"stationarity_residual", zeta.residual},
                      {"fixed_point_residual", report.fixed_point_residuals[l]},
                      {"contraction_factor", report.contraction_factors[l]},
                      {"unvisited", unvisited}});
  }
  return {{"period", report.period},
          {"partial", report.partial},
          {"composed_contraction_factor", report.composed_contraction_factor},
          {"phases", phases}};
}

void write_json(const std::filesystem::path& path, const json& doc) {
  auto out = open_out(path);
  out << doc.dump(2) << '\n';
}

}  // namespace rasql
