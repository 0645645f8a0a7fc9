#include "regtrace/scenario.hpp"

#include <fstream>
#include <sstream>
#include <vector>

namespace regtrace {

namespace {

struct Line {
  int number = 0;
  std::string text;
};

[[noreturn]] void fail(const std::string& origin, int line, const std::string& msg) {
  std::ostringstream os;
  os << origin << ":" << line << ": " << msg;
  throw ValidationError(os.str());
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<Line> tokenize(const std::string& text) {
  std::vector<Line> lines;
  std::istringstream in(text);
  std::string raw;
  int number = 0;
  while (std::getline(in, raw)) {
    ++number;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string t = trim(raw);
    if (!t.empty()) lines.push_back({number, t});
  }
  return lines;
}

double parse_real(const std::string& origin, int line, const std::string& key,
                  const std::string& value) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    fail(origin, line, "value for '" + key + "' is not a number: '" + value + "'");
  }
  if (used != value.size())
    fail(origin, line, "trailing characters after the value of '" + key + "'");
  return v;
}

int parse_int(const std::string& origin, int line, const std::string& key,
              const std::string& value) {
  const double v = parse_real(origin, line, key, value);
  const int i = static_cast<int>(v);
  if (static_cast<double>(i) != v)
    fail(origin, line, "value for '" + key + "' must be an integer");
  return i;
}

std::vector<double> parse_row(const std::string& origin, int line, const std::string& value) {
  std::vector<double> out;
  std::istringstream in(value);
  std::string tok;
  while (in >> tok) out.push_back(parse_real(origin, line, "row", tok));
  if (out.empty()) fail(origin, line, "empty matrix row");
  return out;
}

}  // namespace

ScenarioFile parse_scenario_text(const std::string& text, const std::string& origin) {
  const std::vector<Line> lines = tokenize(text);
  ScenarioFile sc;

  enum class Block { kNone, kModel, kPotential, kTerm, kRun };
  Block block = Block::kNone;
  bool saw_model = false, saw_potential = false, saw_run = false;
  bool in_r = false, in_a = false, in_alpha = false, in_t = false, in_k = false;
  bool run_gap = false, run_safe = false, run_nodes = false, run_out = false;
  struct PendingTerm {
    int line = 0;
    std::optional<int> n;
    std::vector<std::vector<double>> rows;
  };
  PendingTerm term;

  auto finish_term = [&](int line) {
    if (!term.n) fail(origin, line, "term block is missing 'n'");
    if (term.rows.empty()) fail(origin, line, "term block has no matrix rows");
    const std::size_t t = term.rows.size();
    Eigen::MatrixXd m(t, t);
    for (std::size_t i = 0; i < t; ++i) {
      if (term.rows[i].size() != t)
        fail(origin, term.line,
             "matrix rows must form a square T x T block (row " + std::to_string(i + 1) +
                 " has " + std::to_string(term.rows[i].size()) + " entries, expected " +
                 std::to_string(t) + ")");
      for (std::size_t j = 0; j < t; ++j) m(i, j) = term.rows[i][j];
    }
    CosineTerm out;
    out.n = *term.n;
    out.coeff = m;
    sc.model.terms.push_back(std::move(out));
    term = PendingTerm{};
  };

  for (const Line& ln : lines) {
    const std::string& t = ln.text;
    if (t == "}") {
      switch (block) {
        case Block::kNone:
          fail(origin, ln.number, "unmatched '}'");
        case Block::kTerm:
          finish_term(ln.number);
          block = Block::kPotential;
          break;
        case Block::kModel:
        case Block::kPotential:
        case Block::kRun:
          block = Block::kNone;
          break;
      }
      continue;
    }
    if (t.back() == '{') {
      const std::string name = trim(t.substr(0, t.size() - 1));
      if (block == Block::kNone) {
        if (name == "model" && !saw_model) {
          block = Block::kModel;
          saw_model = true;
        } else if (name == "potential" && !saw_potential) {
          block = Block::kPotential;
          saw_potential = true;
        } else if (name == "run" && !saw_run) {
          block = Block::kRun;
          saw_run = true;
        } else {
          fail(origin, ln.number, "unknown or duplicate block '" + name + "'");
        }
      } else if (block == Block::kPotential && name == "term") {
        block = Block::kTerm;
        term.line = ln.number;
      } else {
        fail(origin, ln.number, "unexpected block '" + name + "' here");
      }
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) fail(origin, ln.number, "expected 'key = value'");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (value.empty()) fail(origin, ln.number, "missing value for '" + key + "'");

    switch (block) {
      case Block::kModel:
        if (key == "r" && !in_r) {
          sc.model.r = parse_int(origin, ln.number, key, value);
          in_r = true;
        } else if (key == "a" && !in_a) {
          sc.model.a = parse_real(origin, ln.number, key, value);
          in_a = true;
        } else if (key == "alpha" && !in_alpha) {
          sc.model.alpha = parse_real(origin, ln.number, key, value);
          in_alpha = true;
        } else if (key == "T" && !in_t) {
          sc.model.T = parse_int(origin, ln.number, key, value);
          in_t = true;
        } else if (key == "K" && !in_k) {
          sc.model.K = parse_int(origin, ln.number, key, value);
          in_k = true;
        } else {
          fail(origin, ln.number, "unknown or duplicate model key '" + key + "'");
        }
        break;
      case Block::kTerm:
        if (key == "n" && !term.n) {
          term.n = parse_int(origin, ln.number, key, value);
        } else if (key == "row") {
          term.rows.push_back(parse_row(origin, ln.number, value));
        } else {
          fail(origin, ln.number, "unknown or duplicate term key '" + key + "'");
        }
        break;
      case Block::kRun:
        if (key == "gap_floor" && !run_gap) {
          sc.run.gap_floor = parse_real(origin, ln.number, key, value);
          run_gap = true;
        } else if (key == "safe_fraction" && !run_safe) {
          sc.run.safe_fraction = parse_real(origin, ln.number, key, value);
          run_safe = true;
        } else if (key == "nodes_mult" && !run_nodes) {
          sc.run.nodes_mult = parse_int(origin, ln.number, key, value);
          run_nodes = true;
        } else if (key == "out_dir" && !run_out) {
          sc.run.out_dir = value;
          run_out = true;
        } else if (key == "m_override" && !sc.run.m_override) {
          sc.run.m_override = parse_int(origin, ln.number, key, value);
        } else {
          fail(origin, ln.number, "unknown or duplicate run key '" + key + "'");
        }
        break;
      case Block::kPotential:
        fail(origin, ln.number, "only 'term { ... }' blocks are allowed in 'potential'");
      case Block::kNone:
        fail(origin, ln.number, "key '" + key + "' outside of any block");
    }
  }
  if (block != Block::kNone) throw ValidationError(origin + ": unterminated block");
  if (!saw_model) throw ValidationError(origin + ": missing 'model' block");
  if (!saw_potential) throw ValidationError(origin + ": missing 'potential' block");
  if (!saw_run) throw ValidationError(origin + ": missing 'run' block");
  if (!(in_r && in_a && in_alpha && in_t && in_k))
    throw ValidationError(origin + ": model block must set r, a, alpha, T and K");
  if (!(run_gap && run_safe && run_nodes && run_out))
    throw ValidationError(origin +
                          ": run block must set gap_floor, safe_fraction, nodes_mult, out_dir");
  if (sc.run.gap_floor <= 0.0 || sc.run.gap_floor >= 1.0)
    throw ValidationError(origin + ": gap_floor must lie in (0, 1)");
  if (sc.run.safe_fraction <= 0.0 || sc.run.safe_fraction > 1.0)
    throw ValidationError(origin + ": safe_fraction must lie in (0, 1]");
  if (sc.run.nodes_mult < 1)
    throw ValidationError(origin + ": nodes_mult must be a positive integer");
  if (sc.run.m_override && *sc.run.m_override < 2)
    throw ValidationError(origin + ": m_override must be at least 2");
  return sc;
}

ScenarioFile parse_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open scenario file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str(), path);
}

}  // namespace regtrace
