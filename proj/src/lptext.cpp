#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>
#include <unordered_map>

#include <fmt/format.h>

#include "hubopt/solver.hpp"

namespace hubopt {

std::string format_number(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) return "0";
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

namespace {

constexpr std::size_t kMaxNameLength = 255;
constexpr std::size_t kMaxLineLength = 240;

bool legal_char(char c) {
  if (std::isalnum(static_cast<unsigned char>(c))) return true;
  static const std::string extra = "!\"#$%&()/,.;?@_`'{}|~";
  return extra.find(c) != std::string::npos;
}

bool is_keyword(const std::string& name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  static const std::array<const char*, 18> words = {"minimize", "minimise", "min",  "maximize", "maximise", "max",
                                                    "subject",  "st",       "s.t.", "such",     "bounds",   "bound",
                                                    "free",     "end",      "inf",  "infinity", "general",  "binary"};
  return std::any_of(words.begin(), words.end(), [&](const char* w) { return lower == w; });
}

}  // namespace

bool is_legal_lp_name(const std::string& name) {
  if (name.empty() || name.size() > kMaxNameLength) return false;
  const char first = name.front();
  if (std::isdigit(static_cast<unsigned char>(first)) || first == '.') return false;
  // A leading e/E followed by a digit reads as an exponent in some parsers.
  if ((first == 'e' || first == 'E') && name.size() > 1 && std::isdigit(static_cast<unsigned char>(name[1])))
    return false;
  if (!std::all_of(name.begin(), name.end(), legal_char)) return false;
  return !is_keyword(name);
}

namespace {

/// Appends "+ 2 x" style terms, wrapping before the line grows too long.
class TermWriter {
 public:
  TermWriter(std::string& out, std::string prefix) : out_(out), line_(std::move(prefix)) {}

  void term(double coefficient, const std::string& name) {
    const bool negative = coefficient < 0 || (coefficient == 0.0 && std::signbit(coefficient));
    const double magnitude = std::abs(coefficient);
    std::string piece = magnitude == 1.0 ? name : format_number(magnitude) + " " + name;
    if (negative) piece = (first_ ? "-" : "- ") + piece;
    else if (!first_) piece = "+ " + piece;
    first_ = false;
    if (line_.size() + 1 + piece.size() > kMaxLineLength) {
      out_ += line_;
      out_ += '\n';
      line_ = " ";
    } else {
      line_ += ' ';
    }
    line_ += piece;
  }

  void finish(const std::string& tail) {
    out_ += line_;
    out_ += tail;
    out_ += '\n';
  }

 private:
  std::string& out_;
  std::string line_;
  bool first_ = true;
};

}  // namespace

LpText write_lp_text(const LpProblem& problem) {
  LpText lp;
  lp.column_names.reserve(problem.num_columns());
  lp.row_names.reserve(problem.num_rows());
  for (std::size_t j = 0; j < problem.num_columns(); ++j) {
    const std::string& name = problem.columns()[j].name;
    if (is_legal_lp_name(name)) {
      lp.column_names.push_back(name);
    } else {
      lp.column_names.push_back(fmt::format("_c{}", j));
      lp.mapping += fmt::format("column\t{}\t{}\t{}\n", j, name, lp.column_names.back());
      ++lp.renamed;
    }
  }
  for (std::size_t i = 0; i < problem.num_rows(); ++i) {
    const std::string& name = problem.rows()[i].name;
    if (is_legal_lp_name(name)) {
      lp.row_names.push_back(name);
    } else {
      lp.row_names.push_back(fmt::format("_r{}", i));
      lp.mapping += fmt::format("row\t{}\t{}\t{}\n", i, name, lp.row_names.back());
      ++lp.renamed;
    }
  }

  // Row-major view with duplicate (row, column) pairs summed in first-seen order.
  std::vector<std::vector<std::pair<std::size_t, double>>> rows(problem.num_rows());
  {
    std::vector<std::unordered_map<std::size_t, std::size_t>> seen(problem.num_rows());
    for (const auto& e : problem.entries()) {
      auto [it, inserted] = seen[e.row].emplace(e.col, rows[e.row].size());
      if (inserted) rows[e.row].emplace_back(e.col, e.value);
      else rows[e.row][it->second].second += e.value;
    }
  }

  std::string& out = lp.text;
  out.reserve(64 * (problem.num_rows() + problem.num_columns()) + 64 * problem.entries().size() / 4);
  out += "Minimize\n";
  {
    TermWriter w(out, " obj:");
    bool any = false;
    for (std::size_t j = 0; j < problem.num_columns(); ++j) {
      const double c = problem.columns()[j].cost;
      if (c == 0.0) continue;
      w.term(c, lp.column_names[j]);
      any = true;
    }
    if (!any && problem.num_columns() > 0) w.term(0.0, lp.column_names[0]);
    w.finish("");
  }
  out += "Subject To\n";
  for (std::size_t i = 0; i < problem.num_rows(); ++i) {
    const auto& row = problem.rows()[i];
    TermWriter w(out, " " + lp.row_names[i] + ":");
    if (rows[i].empty()) {
      if (problem.num_columns() == 0) continue;
      w.term(0.0, lp.column_names[0]);
    }
    for (const auto& [col, v] : rows[i]) w.term(v, lp.column_names[col]);
    const char* op = row.sense == Sense::Equal ? " = " : (row.sense == Sense::LessEqual ? " <= " : " >= ");
    w.finish(op + format_number(row.rhs));
  }
  out += "Bounds\n";
  for (std::size_t j = 0; j < problem.num_columns(); ++j) {
    const auto& c = problem.columns()[j];
    const std::string& name = lp.column_names[j];
    const bool lo = std::isfinite(c.lower);
    const bool hi = std::isfinite(c.upper);
    if (!lo && !hi) {
      out += " " + name + " free\n";
    } else if (lo && hi && c.lower == c.upper) {
      out += " " + name + " = " + format_number(c.lower) + "\n";
    } else if (lo && hi) {
      out += " " + format_number(c.lower) + " <= " + name + " <= " + format_number(c.upper) + "\n";
    } else if (lo) {
      out += " " + name + " >= " + format_number(c.lower) + "\n";
    } else {
      out += " -inf <= " + name + " <= " + format_number(c.upper) + "\n";
    }
  }
  out += "End\n";
  return lp;
}

namespace {

struct Section {
  std::vector<std::pair<std::string, double>> columns;
  std::vector<std::pair<std::string, double>> rows;
  bool present = false;
};

double parse_double(const std::string& token) {
  if (token == "inf" || token == "+inf" || token == "Inf") return kInf;
  if (token == "-inf" || token == "-Inf") return -kInf;
  std::size_t used = 0;
  const double v = std::stod(token, &used);
  if (used != token.size()) throw InputError("malformed number '" + token + "' in solution file");
  return v;
}

void read_block(std::istringstream& in, const std::string& header, std::vector<std::pair<std::string, double>>& out) {
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind(header, 0) == 0) break;
  }
  if (line.rfind(header, 0) != 0) throw InputError("solution file lacks '" + header + "'");
  const std::size_t count = std::stoul(line.substr(header.size()));
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    if (!std::getline(in, line)) throw InputError("solution file ends inside '" + header + "' block");
    const auto sp = line.find_last_of(' ');
    if (sp == std::string::npos) throw InputError("malformed solution line '" + line + "'");
    out.emplace_back(line.substr(0, sp), parse_double(line.substr(sp + 1)));
  }
}

}  // namespace

LpSolution parse_highs_solution(const std::string& text, const LpProblem& problem, const LpText& names) {
  LpSolution sol;
  sol.solver = "external";
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line) && line != "Model status") {
  }
  if (line != "Model status" || !std::getline(in, line)) throw InputError("solution file lacks a model status");
  const std::string status = line;
  if (status == "Infeasible") {
    sol.status = SolveStatus::Infeasible;
    sol.message = status;
    return sol;
  }
  if (status == "Unbounded") {
    sol.status = SolveStatus::Unbounded;
    sol.message = status;
    return sol;
  }
  if (status != "Optimal") {
    sol.status = SolveStatus::Error;
    sol.message = "backend reported model status '" + status + "'";
    return sol;
  }

  Section primal, dual;
  while (std::getline(in, line) && line != "# Primal solution values") {
  }
  while (std::getline(in, line)) {
    if (line.rfind("Objective ", 0) == 0) {
      sol.objective = parse_double(line.substr(10));
      break;
    }
  }
  read_block(in, "# Columns ", primal.columns);
  read_block(in, "# Rows ", primal.rows);
  while (std::getline(in, line) && line != "# Dual solution values") {
  }
  if (line == "# Dual solution values") {
    read_block(in, "# Columns ", dual.columns);
    read_block(in, "# Rows ", dual.rows);
    dual.present = true;
  }

  std::unordered_map<std::string, std::size_t> col_index, row_index;
  for (std::size_t j = 0; j < names.column_names.size(); ++j) col_index.emplace(names.column_names[j], j);
  for (std::size_t i = 0; i < names.row_names.size(); ++i) row_index.emplace(names.row_names[i], i);

  auto scatter = [](const std::vector<std::pair<std::string, double>>& values,
                    const std::unordered_map<std::string, std::size_t>& index, std::vector<double>& out,
                    const char* what) {
    std::vector<char> hit(out.size(), 0);
    for (const auto& [name, v] : values) {
      auto it = index.find(name);
      if (it == index.end()) throw InputError(fmt::format("solution names unknown {} '{}'", what, name));
      out[it->second] = v;
      hit[it->second] = 1;
    }
    if (std::find(hit.begin(), hit.end(), 0) != hit.end())
      throw InputError(fmt::format("solution file misses some {} values", what));
  };

  sol.primal.assign(problem.num_columns(), 0.0);
  sol.duals.assign(problem.num_rows(), 0.0);
  sol.reduced_costs.assign(problem.num_columns(), 0.0);
  scatter(primal.columns, col_index, sol.primal, "column");
  if (dual.present) {
    scatter(dual.columns, col_index, sol.reduced_costs, "column");
    if (problem.num_rows() > 0) scatter(dual.rows, row_index, sol.duals, "row");
  } else {
    throw InputError("solution file carries no dual values");
  }
  sol.status = SolveStatus::Optimal;
  return sol;
}

}  // namespace hubopt
