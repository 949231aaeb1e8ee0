#include "iashock/io.hpp"
#include "iashock/error.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace iashock::io {

namespace {

[[noreturn]] void fail(const std::string &msg)
{
  throw SolverError(ErrorKind::ConfigError, msg);
}

} // namespace

std::string format_double(double x)
{
  char buf[32];
  auto const r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

void ensure_parent(const std::string &path)
{
  std::filesystem::path const parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
}

void write_csv(const std::string &path, const std::vector<Column> &columns, const std::string &header)
{
  require(!columns.empty(), "write_csv: no columns");
  Eigen::Index const rows = columns.front().data.size();
  for (auto const &c : columns) require(c.data.size() == rows, "write_csv: column '" + c.name + "' has the wrong length");
  ensure_parent(path);
  std::ofstream out(path);
  if (!out) fail("cannot write '" + path + "'");
  std::istringstream hs(header);
  std::string line;
  while (std::getline(hs, line)) out << "# " << line << '\n';
  for (std::size_t j = 0; j < columns.size(); ++j) out << (j ? "," : "") << columns[j].name;
  out << '\n';
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < columns.size(); ++j) out << (j ? "," : "") << format_double(columns[j].data[i]);
    out << '\n';
  }
}

const Vec &CsvTable::column(const std::string &name) const
{
  for (std::size_t j = 0; j < names.size(); ++j) {
    if (names[j] == name) return columns[j];
  }
  fail("csv: missing column '" + name + "'");
}

bool CsvTable::has(const std::string &name) const
{
  for (auto const &n : names) {
    if (n == name) return true;
  }
  return false;
}

CsvTable read_csv(const std::string &path)
{
  std::ifstream in(path);
  if (!in) fail("cannot read '" + path + "'");
  CsvTable t;
  std::vector<std::vector<double>> cols;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      auto const eq = line.find('=');
      if (eq != std::string::npos) {
        auto trim = [](std::string x) {
          x.erase(0, x.find_first_not_of(" #\t"));
          x.erase(x.find_last_not_of(" \t") + 1);
          return x;
        };
        t.meta[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
      }
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    if (t.names.empty()) {
      while (std::getline(ss, cell, ',')) t.names.push_back(cell);
      cols.resize(t.names.size());
      continue;
    }
    std::size_t j = 0;
    while (std::getline(ss, cell, ',')) {
      if (j >= cols.size()) fail(path + ":" + std::to_string(lineno) + ": too many cells");
      double x = 0.0;
      auto const r = std::from_chars(cell.data(), cell.data() + cell.size(), x);
      if (r.ec != std::errc()) fail(path + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
      cols[j++].push_back(x);
    }
    if (j != cols.size()) fail(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(cols.size()) + " cells");
  }
  if (t.names.empty()) fail(path + ": no header row");
  for (auto const &c : cols) t.columns.push_back(Eigen::Map<const Vec>(c.data(), static_cast<Eigen::Index>(c.size())));
  return t;
}

void write_json(const std::string &path, const nlohmann::ordered_json &doc)
{
  ensure_parent(path);
  std::ofstream out(path);
  if (!out) fail("cannot write '" + path + "'");
  out << doc.dump(2) << '\n';
}

nlohmann::ordered_json to_json(const Vec &v)
{
  return to_json(std::vector<double>(v.data(), v.data() + v.size()));
}

nlohmann::ordered_json to_json(const std::vector<double> &v)
{
  nlohmann::ordered_json a = nlohmann::ordered_json::array();
  for (double x : v) a.push_back(x);
  return a;
}

} // namespace iashock::io
