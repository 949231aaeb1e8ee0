#pragma once

#include "types.hpp"

#include <json.hpp>

#include <map>
#include <string>
#include <vector>

namespace iashock::io {

struct Column
{
  std::string name;
  Vec         data;
};

// header lines are written as '# ' comments before the column names
void write_csv(const std::string &path, const std::vector<Column> &columns, const std::string &header = "");

struct CsvTable
{
  std::vector<std::string> names;
  std::vector<Vec>         columns;
  // '# key = value' header lines
  std::map<std::string, std::string> meta;

  const Vec &column(const std::string &name) const;
  bool       has(const std::string &name) const;
};

CsvTable read_csv(const std::string &path);

void write_json(const std::string &path, const nlohmann::ordered_json &doc);

// shortest round-trip text for a double
std::string format_double(double x);

nlohmann::ordered_json to_json(const Vec &v);
nlohmann::ordered_json to_json(const std::vector<double> &v);

// creates the parent directory of path if it is missing
void ensure_parent(const std::string &path);

} // namespace iashock::io
