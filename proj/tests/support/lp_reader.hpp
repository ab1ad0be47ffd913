#pragma once

// Minimal reader for the LP text format the writer emits, used as the
// round-trip oracle in tests. Parses the Objective / Subject To / Bounds /
// Binaries sections into a fresh LinearProgram with variables indexed by
// first appearance.

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "codesign/lp.hpp"

namespace codesign::testsupport {

struct ParsedLp {
  LinearProgram lp;
  BinaryMarking binaries;
  std::map<std::string, int> index;  // name -> variable index
};

namespace lpdetail {

inline std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) {
      tokens.push_back(cur);
      cur.clear();
    }
  };
  auto continues_exponent = [&](char ch) {
    // Keeps the sign inside scientific-notation numbers like 1e+30.
    return (ch == '+' || ch == '-') && !cur.empty() &&
           (cur.back() == 'e' || cur.back() == 'E') &&
           (std::isdigit(static_cast<unsigned char>(cur.front())) || cur.front() == '.');
  };
  for (char ch : text) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      flush();
    } else if (continues_exponent(ch)) {
      cur += ch;
    } else if (ch == '+' || ch == '-' || ch == ':') {
      flush();
      tokens.push_back(std::string(1, ch));
    } else if (ch == '<' || ch == '>' || ch == '=') {
      if (cur == "<" || cur == ">") {
        cur += ch;
        flush();
      } else {
        flush();
        cur = ch;
        if (ch == '=') flush();
      }
    } else {
      if (cur == "<" || cur == ">") flush();
      cur += ch;
    }
  }
  flush();
  return tokens;
}

inline bool is_number(const std::string& t) {
  if (t.empty()) return false;
  char* end = nullptr;
  std::strtod(t.c_str(), &end);
  return end == t.c_str() + t.size();
}

inline bool is_relation(const std::string& t) { return t == "<=" || t == ">=" || t == "=" || t == "<" || t == ">"; }

}  // namespace lpdetail

inline ParsedLp read_lp_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open lp file: " + path);

  // Strip comments, join everything, then split into sections by keyword.
  std::string text;
  std::string line;
  while (std::getline(in, line)) {
    const auto slash = line.find('\\');
    if (slash != std::string::npos) line = line.substr(0, slash);
    text += line + "\n";
  }

  ParsedLp out;
  auto intern = [&](const std::string& name) {
    auto it = out.index.find(name);
    if (it != out.index.end()) return it->second;
    const int idx = out.lp.add_variable(name, 0.0, std::numeric_limits<double>::infinity());
    out.index[name] = idx;
    return idx;
  };

  std::vector<std::string> tokens = lpdetail::tokenize(text);
  size_t pos = 0;
  auto lower = [](std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
  };
  auto section_at = [&](size_t i) -> std::string {
    if (i >= tokens.size()) return "";
    const std::string t = lower(tokens[i]);
    if (t == "minimize" || t == "maximize" || t == "bounds" || t == "end" || t == "binaries" ||
        t == "binary" || t == "general" || t == "subject")
      return t;
    return "";
  };

  // Sense
  if (section_at(pos).empty()) throw std::runtime_error("lp file must start with a sense");
  out.lp.sense = lower(tokens[pos]) == "minimize" ? Sense::minimize : Sense::maximize;
  ++pos;

  // Expression parser: reads +/-/coefficient/name terms until a relation,
  // a section keyword, or a constraint label.
  auto parse_expression = [&](std::vector<std::pair<int, double>>& terms, double& constant) {
    double sign = 1.0;
    bool have_coeff = false;
    double coeff = 1.0;
    while (pos < tokens.size()) {
      const std::string& t = tokens[pos];
      if (lpdetail::is_relation(t)) break;
      if (!section_at(pos).empty()) break;
      // A name followed by ':' labels the next constraint; stop before it.
      if (pos + 1 < tokens.size() && tokens[pos + 1] == ":" && !have_coeff && !lpdetail::is_number(t))
        break;
      if (t == "+") {
        if (have_coeff) { constant += sign * coeff; have_coeff = false; }
        sign = 1.0;
        ++pos;
      } else if (t == "-") {
        if (have_coeff) { constant += sign * coeff; have_coeff = false; }
        sign = -1.0;
        ++pos;
      } else if (lpdetail::is_number(t)) {
        if (have_coeff) { constant += sign * coeff; }
        coeff = std::strtod(t.c_str(), nullptr);
        have_coeff = true;
        ++pos;
      } else {
        terms.push_back({intern(t), sign * (have_coeff ? coeff : 1.0)});
        sign = 1.0;
        coeff = 1.0;
        have_coeff = false;
        ++pos;
      }
    }
    if (have_coeff) constant += sign * coeff;
  };

  // Objective: optional "obj:" label.
  if (pos + 1 < tokens.size() && tokens[pos + 1] == ":") pos += 2;
  std::vector<std::pair<int, double>> obj_terms;
  double obj_constant = 0.0;
  parse_expression(obj_terms, obj_constant);
  out.lp.objective_offset = obj_constant;

  if (lower(tokens[pos]) != "subject" || lower(tokens[pos + 1]) != "to")
    throw std::runtime_error("expected 'Subject To'");
  pos += 2;

  // Constraints until a section keyword.
  while (pos < tokens.size() && section_at(pos).empty()) {
    std::string name;
    if (pos + 1 < tokens.size() && tokens[pos + 1] == ":") {
      name = tokens[pos];
      pos += 2;
    }
    std::vector<std::pair<int, double>> terms;
    double constant = 0.0;
    parse_expression(terms, constant);
    if (pos >= tokens.size() || !lpdetail::is_relation(tokens[pos]))
      throw std::runtime_error("constraint without relation near token " + std::to_string(pos));
    const std::string rel_tok = tokens[pos];
    ++pos;
    if (pos >= tokens.size() || !lpdetail::is_number(tokens[pos]))
      throw std::runtime_error("constraint without rhs");
    const double rhs = std::strtod(tokens[pos].c_str(), nullptr) - constant;
    ++pos;
    const Relation rel = (rel_tok == "<=" || rel_tok == "<")   ? Relation::less_equal
                         : (rel_tok == ">=" || rel_tok == ">") ? Relation::greater_equal
                                                               : Relation::equal;
    out.lp.add_constraint(std::move(terms), rel, rhs, name);
  }

  // Bounds
  if (pos < tokens.size() && lower(tokens[pos]) == "bounds") {
    ++pos;
    while (pos < tokens.size() && section_at(pos).empty()) {
      // Forms: "lo <= x <= up" | "x <= up" | "x >= lo" | "x = v" | "x free" | "-inf <= x <= up"
      double sign = 1.0;
      if (tokens[pos] == "-") { sign = -1.0; ++pos; }
      if (lpdetail::is_number(tokens[pos]) || lower(tokens[pos]) == "inf" ||
          lower(tokens[pos]) == "infinity") {
        const double lo = lower(tokens[pos]) == "inf" || lower(tokens[pos]) == "infinity"
                              ? sign * std::numeric_limits<double>::infinity()
                              : sign * std::strtod(tokens[pos].c_str(), nullptr);
        ++pos;
        if (tokens[pos] != "<=" && tokens[pos] != "<") throw std::runtime_error("bad bounds line");
        ++pos;
        const int j = intern(tokens[pos]);
        ++pos;
        out.lp.lower[j] = lo;
        if (pos < tokens.size() && (tokens[pos] == "<=" || tokens[pos] == "<")) {
          ++pos;
          double s2 = 1.0;
          if (tokens[pos] == "-") { s2 = -1.0; ++pos; }
          out.lp.upper[j] = lower(tokens[pos]) == "inf" || lower(tokens[pos]) == "infinity"
                                ? s2 * std::numeric_limits<double>::infinity()
                                : s2 * std::strtod(tokens[pos].c_str(), nullptr);
          ++pos;
        }
      } else {
        const int j = intern(tokens[pos]);
        ++pos;
        const std::string t = pos < tokens.size() ? lower(tokens[pos]) : "";
        if (t == "free") {
          out.lp.lower[j] = -std::numeric_limits<double>::infinity();
          out.lp.upper[j] = std::numeric_limits<double>::infinity();
          ++pos;
        } else if (t == "<=" || t == "<") {
          ++pos;
          double s2 = 1.0;
          if (tokens[pos] == "-") { s2 = -1.0; ++pos; }
          out.lp.lower[j] = 0.0;
          out.lp.upper[j] = s2 * std::strtod(tokens[pos].c_str(), nullptr);
          ++pos;
        } else if (t == ">=" || t == ">") {
          ++pos;
          double s2 = 1.0;
          if (tokens[pos] == "-") { s2 = -1.0; ++pos; }
          out.lp.lower[j] = s2 * std::strtod(tokens[pos].c_str(), nullptr);
          out.lp.upper[j] = std::numeric_limits<double>::infinity();
          ++pos;
        } else if (t == "=") {
          ++pos;
          double s2 = 1.0;
          if (tokens[pos] == "-") { s2 = -1.0; ++pos; }
          const double v = s2 * std::strtod(tokens[pos].c_str(), nullptr);
          out.lp.lower[j] = v;
          out.lp.upper[j] = v;
          ++pos;
        } else {
          throw std::runtime_error("bad bounds line near '" + tokens[pos] + "'");
        }
      }
    }
  }

  if (pos < tokens.size() && (lower(tokens[pos]) == "binaries" || lower(tokens[pos]) == "binary")) {
    ++pos;
    while (pos < tokens.size() && section_at(pos).empty()) {
      out.binaries.indices.push_back(intern(tokens[pos]));
      ++pos;
    }
  }
  if (pos >= tokens.size() || lower(tokens[pos]) != "end")
    throw std::runtime_error("lp file missing End");

  // Attach objective coefficients now that every variable is known.
  for (const auto& [j, v] : obj_terms) out.lp.objective[j] += v;
  return out;
}

}  // namespace codesign::testsupport
