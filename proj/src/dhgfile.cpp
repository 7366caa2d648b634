#include "dhg/dhgfile.hpp"

#include <fstream>
#include <sstream>

namespace dhg {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool starts_with_word(const std::string& s, const std::string& w) {
  return s.compare(0, w.size(), w) == 0 && (s.size() == w.size() || s[w.size()] == ' ' || s[w.size()] == '\t');
}

std::string first_word(const std::string& s) { return s.substr(0, s.find_first_of(" \t:")); }

struct Line {
  int number;
  int indent;
  std::string text;
};

// Splits at top-level commas (outside brackets and parentheses).
std::vector<std::string> split_top(const std::string& s, char sep) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char ch : s) {
    if (ch == '(' || ch == '[' || ch == '{') ++depth;
    if (ch == ')' || ch == ']' || ch == '}') --depth;
    if (ch == sep && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(trim(cur));
  return out;
}

const std::vector<std::string> kKeywords = {"witness", "epsilon", "game", "solution", "time"};

bool is_formula_rule(const std::string& rule) {
  return rule == "cut" || rule == "monotone" || rule == "loop-ind" || rule == "orL";
}

void parse_consts(const std::vector<Line>& lines, ParseContext& ctx) {
  for (const auto& l : lines) {
    const std::string& s = l.text;
    try {
      if (starts_with_word(s, "vector")) {
        std::istringstream in(s.substr(6));
        std::string name;
        int dim = 0;
        if (!(in >> name >> dim) || dim < 1) throw DhgError("expected `vector NAME DIM`", l.number);
        ctx.vectors[name] = dim;
        continue;
      }
      size_t eq = s.find('=');
      if (eq == std::string::npos) throw DhgError("expected a declaration", l.number);
      std::string lhs = trim(s.substr(0, eq)), rhs = trim(s.substr(eq + 1));
      if (starts_with_word(lhs, "set")) {
        std::string head = trim(lhs.substr(3));
        size_t lp = head.find('('), rp = head.find(')');
        if (lp == std::string::npos || rp == std::string::npos || rp < lp)
          throw DhgError("expected `set NAME(param) = formula`", l.number);
        ctx.sets[trim(head.substr(0, lp))] = {trim(head.substr(lp + 1, rp - lp - 1)), rhs};
      } else if (starts_with_word(lhs, "formula")) {
        ctx.formulas[trim(lhs.substr(7))] = parse_formula(rhs, ctx);
      } else {
        ParseContext c = ctx;
        c.allow_witness = true;
        ctx.abbreviations[lhs] = parse_vector_term(rhs, c);
      }
    } catch (const DhgError&) {
      throw;
    } catch (const std::exception& e) {
      throw DhgError(e.what(), l.number);
    }
  }
}

void apply_option(const std::string& text, BackendConfig& cfg, int line) {
  std::istringstream in(text);
  std::string kw, name, value;
  in >> kw >> name >> value;
  try {
    if (name == "budget") {
      cfg.forall.budget = std::stoul(value);
      cfg.exists.budget = std::max(cfg.exists.budget, cfg.forall.budget);
    } else if (name == "outer-splits") {
      cfg.exists.outer_splits = std::stoi(value);
    } else if (name == "solver") {
      if (value != "z3" && value != "none") throw DhgError("solver must be z3 or none", line);
      cfg.external_solver = value == "z3";
    } else if (name == "timeout") {
      cfg.solver_timeout = std::stod(value);
    } else {
      throw DhgError("unknown option '" + name + "'", line);
    }
  } catch (const DhgError&) {
    throw;
  } catch (const std::exception&) {
    throw DhgError("bad value for option " + name, line);
  }
}

struct ProofParser {
  const std::vector<Line>& lines;
  const ParseContext& ctx;
  size_t i = 0;

  std::vector<ProofStep> steps(int indent) {
    std::vector<ProofStep> out;
    while (i < lines.size() && lines[i].indent == indent) {
      const Line& l = lines[i];
      if (starts_with_word(l.text, "case") || (l.text.rfind("case", 0) == 0 && l.text.find(':') != std::string::npos))
        throw DhgError("case without a preceding rule", l.number);
      ProofStep step;
      if (l.text == "open") {
        step.open = true;
        ++i;
      } else if (starts_with_word(l.text, "rule")) {
        step.app = parse_rule_line(trim(l.text.substr(4)), ctx, l.number);
        ++i;
        if (i < lines.size() && lines[i].indent > indent) step.cases = cases(lines[i].indent);
      } else {
        throw DhgError("expected `rule`, `case` or `open`", l.number);
      }
      out.push_back(std::move(step));
    }
    if (i < lines.size() && lines[i].indent > indent) throw DhgError("unexpected indentation", lines[i].number);
    return out;
  }

  std::vector<std::pair<std::string, std::vector<ProofStep>>> cases(int indent) {
    std::vector<std::pair<std::string, std::vector<ProofStep>>> out;
    while (i < lines.size() && lines[i].indent == indent) {
      const Line& l = lines[i];
      if (l.text.rfind("case", 0) != 0 || l.text.back() != ':') throw DhgError("expected `case LABEL:`", l.number);
      std::string label = trim(l.text.substr(4, l.text.size() - 5));
      if (label.empty()) throw DhgError("empty case label", l.number);
      for (const auto& c : out)
        if (c.first == label) throw DhgError("duplicate case '" + label + "'", l.number);
      ++i;
      std::vector<ProofStep> body;
      if (i < lines.size() && lines[i].indent > indent) body = steps(lines[i].indent);
      out.emplace_back(label, std::move(body));
    }
    return out;
  }
};

}  // namespace

std::optional<std::string> DhgFile::oracle_value(const std::string& key) const {
  for (const auto& [k, v] : oracle)
    if (k == key) return v;
  return std::nullopt;
}

RationalBox parse_region(const std::string& text, const ParseContext& ctx) {
  RationalBox box;
  for (const auto& item : split_top(text, ',')) {
    if (item.empty()) continue;
    size_t in = item.find(" in ");
    if (in == std::string::npos) throw std::invalid_argument("expected `VAR in [a,b]`, got '" + item + "'");
    std::string range = trim(item.substr(in + 4));
    if (range.size() < 2 || range.front() != '[' || range.back() != ']')
      throw std::invalid_argument("expected an interval [a,b] in '" + item + "'");
    auto ends = split_top(range.substr(1, range.size() - 2), ',');
    if (ends.size() != 2) throw std::invalid_argument("expected two bounds in '" + item + "'");
    auto value = [&](const std::string& s) {
      auto q = const_value(parse_term(s, ctx));
      if (!q) throw std::invalid_argument("bound '" + s + "' is not a rational constant");
      return *q;
    };
    Rational lo = value(ends[0]), hi = value(ends[1]);
    if (lo > hi) throw std::invalid_argument("empty interval in '" + item + "'");
    for (const Var& v : parse_var_list(trim(item.substr(0, in)), ctx)) box.bounds[v] = {lo, hi};
  }
  return box;
}

RuleApplication parse_rule_line(const std::string& text, const ParseContext& ctx, int line) {
  RuleApplication app;
  app.line = line;
  std::string name = first_word(text);
  app.rule = canonical_rule(name);
  if (app.rule.empty()) throw DhgError("unknown rule '" + name + "'", line);
  std::string rest = trim(text.substr(name.size()));
  ParseContext wctx = ctx;
  wctx.allow_witness = true;
  try {
    if (is_formula_rule(app.rule)) {
      if (!rest.empty()) app.formula = parse_formula(rest, ctx);
      return app;
    }
    // keyword arguments at bracket depth 0
    std::vector<std::pair<std::string, std::string>> args;
    int depth = 0;
    size_t pos = 0, start = std::string::npos;
    std::string current;
    while (pos <= rest.size()) {
      bool boundary = pos == 0 || rest[pos - 1] == ' ';
      std::string kw;
      if (depth == 0 && boundary && pos < rest.size())
        for (const auto& k : kKeywords)
          if (rest.compare(pos, k.size(), k) == 0 &&
              (pos + k.size() == rest.size() || rest[pos + k.size()] == ' '))
            kw = k;
      if (!kw.empty() || pos == rest.size()) {
        if (!current.empty()) args.emplace_back(current, trim(rest.substr(start, pos - start)));
        else if (pos > 0 && !trim(rest.substr(0, pos)).empty())
          throw DhgError("unexpected argument '" + trim(rest.substr(0, pos)) + "'", line);
        if (pos == rest.size()) break;
        current = kw;
        pos += kw.size();
        start = pos;
        continue;
      }
      char ch = rest[pos];
      if (ch == '(' || ch == '[' || ch == '{') ++depth;
      if (ch == ')' || ch == ']' || ch == '}') --depth;
      ++pos;
    }
    for (const auto& [k, v] : args) {
      if (v.empty()) throw DhgError("missing value for '" + k + "'", line);
      if (k == "witness") {
        auto w = parse_assignments(v, wctx);
        app.witness.insert(app.witness.end(), w.begin(), w.end());
      } else if (k == "epsilon") {
        auto q = const_value(parse_term(v, ctx));
        if (!q) throw DhgError("epsilon must be a rational constant", line);
        app.epsilon = *q;
      } else if (k == "game") {
        app.game = parse_game(v, ctx);
      } else if (k == "solution") {
        auto s = parse_assignments(v, wctx);
        app.solution.insert(app.solution.end(), s.begin(), s.end());
      } else if (k == "time") {
        auto vs = parse_var_list(v, ctx);
        if (vs.size() != 1) throw DhgError("time needs one scalar variable", line);
        app.time = vs[0];
      }
    }
  } catch (const DhgError&) {
    throw;
  } catch (const std::exception& e) {
    throw DhgError(e.what(), line);
  }
  return app;
}

DhgFile parse_dhg(const std::string& text, const std::string& name) {
  DhgFile file;
  file.path = name;
  std::map<std::string, std::vector<Line>> sections;
  std::vector<std::string> order;
  std::string current;
  std::istringstream in(text);
  std::string raw;
  int number = 0;
  while (std::getline(in, raw)) {
    ++number;
    if (auto h = raw.find('#'); h != std::string::npos) raw.erase(h);
    if (trim(raw).empty()) continue;
    int indent = 0;
    while (indent < static_cast<int>(raw.size()) && (raw[indent] == ' ' || raw[indent] == '\t')) ++indent;
    std::string body = trim(raw);
    if (indent == 0) {
      if (body.back() != ':' || body.find(' ') != std::string::npos)
        throw DhgError("expected a section header, got '" + body + "'", number);
      current = body.substr(0, body.size() - 1);
      static const std::vector<std::string> known = {"consts", "goal", "proof", "regions", "oracle"};
      if (std::find(known.begin(), known.end(), current) == known.end())
        throw DhgError("unknown section '" + current + "'", number);
      if (sections.count(current)) throw DhgError("duplicate section '" + current + "'", number);
      sections[current];
      order.push_back(current);
      continue;
    }
    if (current.empty()) throw DhgError("content before the first section", number);
    auto& lines = sections[current];
    static const std::vector<std::string> starters = {"rule", "case", "open", "option"};
    bool keyword = std::any_of(starters.begin(), starters.end(), [&](const std::string& k) {
      return first_word(body) == k;
    });
    bool continuation = !lines.empty() && indent > lines.back().indent && (current != "proof" || !keyword);
    if (current == "goal" && !lines.empty()) continuation = true;
    if (continuation)
      lines.back().text += " " + body;
    else
      lines.push_back({number, indent, body});
  }

  parse_consts(sections["consts"], file.ctx);

  if (!sections.count("goal") || sections["goal"].empty()) throw DhgError("missing goal section", number);
  const Line& g = sections["goal"].front();
  file.goal_text = g.text;
  try {
    file.script.goal = parse_formula(g.text, file.ctx);
  } catch (const std::exception& e) {
    throw DhgError(std::string("goal: ") + e.what(), g.number);
  }

  for (const auto& l : sections["regions"]) {
    NamedRegion r;
    std::string body = l.text;
    size_t colon = body.find(':');
    size_t bracket = body.find('[');
    if (colon != std::string::npos && (bracket == std::string::npos || colon < bracket)) {
      r.name = trim(body.substr(0, colon));
      body = body.substr(colon + 1);
    } else {
      r.name = "region" + std::to_string(file.script.regions.size() + 1);
    }
    try {
      r.box = parse_region(body, file.ctx);
    } catch (const std::exception& e) {
      throw DhgError(std::string("region: ") + e.what(), l.number);
    }
    file.script.regions.push_back(r);
  }

  for (const auto& l : sections["oracle"]) {
    size_t eq = l.text.find('=');
    if (eq == std::string::npos) throw DhgError("expected `key = value`", l.number);
    file.oracle.emplace_back(trim(l.text.substr(0, eq)), trim(l.text.substr(eq + 1)));
  }

  if (sections.count("proof")) {
    file.has_proof = true;
    std::vector<Line> rules;
    for (const auto& l : sections["proof"]) {
      if (starts_with_word(l.text, "option"))
        apply_option(l.text, file.script.backend, l.number);
      else
        rules.push_back(l);
    }
    ProofParser p{rules, file.ctx};
    if (!rules.empty()) {
      file.script.steps = p.steps(rules.front().indent);
      if (p.i != rules.size()) throw DhgError("unexpected indentation", rules[p.i].number);
    }
  }
  return file;
}

DhgFile load_dhg(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DhgError("cannot read " + path, 0);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_dhg(buf.str(), path);
}

}  // namespace dhg
