#pragma once

#include <map>
#include <string>
#include <vector>

namespace iashock {

// flat key = value store; keys are case sensitive and treat '_' like '-'
class Config
{
public:
  struct Entry
  {
    std::string value;
    std::string help;
    bool        set = false; // changed from the default by a file or a flag
  };

  // declares a key with its default; parsing rejects undeclared keys
  void declare(const std::string &key, const std::string &default_value, const std::string &help);
  bool has(const std::string &key) const;

  // lines of `key = value`, '#' starts a comment, values may be quoted
  void parse_string(const std::string &text, const std::string &origin = "<string>");
  void parse_file(const std::string &path);
  void set(const std::string &key, const std::string &value);

  const std::string &str(const std::string &key) const;
  double              num(const std::string &key) const;
  int                 integer(const std::string &key) const;
  bool                flag(const std::string &key) const;
  std::vector<double> list(const std::string &key) const; // comma separated
  bool                was_set(const std::string &key) const;

  const std::map<std::string, Entry> &entries() const { return entries_; }
  // `key = value` lines, sorted by key
  std::string dump(const std::string &prefix = "") const;

  static std::string normalize(const std::string &key);

private:
  const Entry &entry(const std::string &key) const;

  std::map<std::string, Entry> entries_;
};

} // namespace iashock
