#include "iashock/config.hpp"
#include "iashock/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace iashock {

namespace {

std::string trim(const std::string &s)
{
  auto const b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  auto const e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(const std::string &msg)
{
  throw SolverError(ErrorKind::ConfigError, msg);
}

double to_double(const std::string &key, const std::string &text)
{
  std::string const t = trim(text);
  double x = 0.0;
  auto const [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    fail("config key '" + key + "': '" + text + "' is not a number");
  }
  return x;
}

} // namespace

std::string Config::normalize(const std::string &key)
{
  std::string k = trim(key);
  std::replace(k.begin(), k.end(), '_', '-');
  return k;
}

void Config::declare(const std::string &key, const std::string &default_value, const std::string &help)
{
  entries_[normalize(key)] = Entry{default_value, help, false};
}

bool Config::has(const std::string &key) const
{
  return entries_.count(normalize(key)) > 0;
}

void Config::set(const std::string &key, const std::string &value)
{
  auto it = entries_.find(normalize(key));
  if (it == entries_.end()) fail("unknown config key '" + key + "'");
  it->second.value = value;
  it->second.set = true;
}

void Config::parse_string(const std::string &text, const std::string &origin)
{
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto const hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto const eq = line.find('=');
    if (eq == std::string::npos) {
      fail(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    std::string const key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(origin + ":" + std::to_string(lineno) + ": empty key");
    if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') && value.back() == value.front()) {
      value = value.substr(1, value.size() - 2);
    }
    if (!has(key)) fail(origin + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    set(key, value);
  }
}

void Config::parse_file(const std::string &path)
{
  std::ifstream in(path);
  if (!in) fail("cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  parse_string(buf.str(), path);
}

const Config::Entry &Config::entry(const std::string &key) const
{
  auto it = entries_.find(normalize(key));
  if (it == entries_.end()) fail("undeclared config key '" + key + "'");
  return it->second;
}

const std::string &Config::str(const std::string &key) const
{
  return entry(key).value;
}

double Config::num(const std::string &key) const
{
  return to_double(key, str(key));
}

int Config::integer(const std::string &key) const
{
  double const x = num(key);
  if (x != static_cast<int>(x)) fail("config key '" + key + "' must be an integer");
  return static_cast<int>(x);
}

bool Config::flag(const std::string &key) const
{
  std::string v = trim(str(key));
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  fail("config key '" + key + "': '" + str(key) + "' is not a boolean");
}

std::vector<double> Config::list(const std::string &key) const
{
  std::vector<double> out;
  std::stringstream ss(str(key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!trim(item).empty()) out.push_back(to_double(key, item));
  }
  return out;
}

bool Config::was_set(const std::string &key) const
{
  return entry(key).set;
}

std::string Config::dump(const std::string &prefix) const
{
  std::ostringstream out;
  for (auto const &[k, e] : entries_) out << prefix << k << " = " << e.value << '\n';
  return out.str();
}

} // namespace iashock
