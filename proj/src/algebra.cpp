#include "mvopt/algebra.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "mvopt/error.hpp"

namespace mvopt {

std::string to_string(CompareOp op) {
  switch (op) {
    case CompareOp::Eq:
      return "=";
    case CompareOp::Lt:
      return "<";
    case CompareOp::Le:
      return "<=";
    case CompareOp::Gt:
      return ">";
    case CompareOp::Ge:
      return ">=";
  }
  return "=";
}

std::string literal_to_string(const Literal& value) {
  if (const auto* i = std::get_if<std::int64_t>(&value)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&value)) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), *d);
    std::string s(buf, res.ptr);
    if (s.find_first_of(".e") == std::string::npos) s += ".0";
    return s;
  }
  return "'" + std::get<std::string>(value) + "'";
}

std::string ColumnPredicate::to_string() const {
  return column + mvopt::to_string(op) + literal_to_string(value);
}

JoinPredicate JoinPredicate::make(std::string a, std::string b) {
  if (b < a) std::swap(a, b);
  return {std::move(a), std::move(b)};
}

std::string JoinPredicate::to_string() const { return left + "=" + right; }

namespace {

std::string unqualified(const std::string& column) {
  auto dot = column.rfind('.');
  return dot == std::string::npos ? column : column.substr(dot + 1);
}

std::string func_name(AggFunc f) {
  switch (f) {
    case AggFunc::Count:
      return "count";
    case AggFunc::Sum:
      return "sum";
    case AggFunc::Avg:
      return "avg";
  }
  return "count";
}

}  // namespace

std::string AggregateSpec::output_name() const { return func_name(func) + "_" + unqualified(column); }

std::string AggregateSpec::to_string() const { return func_name(func) + "(" + column + ")"; }

ExprPtr LogicalExpr::scan(std::string relation, std::string alias) {
  auto e = std::make_shared<LogicalExpr>();
  e->kind = Kind::Scan;
  e->alias = alias.empty() ? relation : std::move(alias);
  e->relation = std::move(relation);
  return e;
}

ExprPtr LogicalExpr::select(std::vector<ColumnPredicate> predicates, ExprPtr input) {
  auto e = std::make_shared<LogicalExpr>();
  e->kind = Kind::Select;
  e->predicates = std::move(predicates);
  e->inputs = {std::move(input)};
  return e;
}

ExprPtr LogicalExpr::join(std::vector<JoinPredicate> predicates, ExprPtr left, ExprPtr right) {
  auto e = std::make_shared<LogicalExpr>();
  e->kind = Kind::Join;
  e->join_predicates = std::move(predicates);
  e->inputs = {std::move(left), std::move(right)};
  return e;
}

ExprPtr LogicalExpr::aggregate(std::vector<std::string> group_columns,
                               std::vector<AggregateSpec> aggregates, ExprPtr input) {
  auto e = std::make_shared<LogicalExpr>();
  e->kind = Kind::Aggregate;
  e->group_columns = std::move(group_columns);
  e->aggregates = std::move(aggregates);
  e->inputs = {std::move(input)};
  return e;
}

bool LogicalExpr::operator==(const LogicalExpr& other) const {
  if (kind != other.kind || relation != other.relation || alias != other.alias ||
      predicates != other.predicates || join_predicates != other.join_predicates ||
      group_columns != other.group_columns || aggregates != other.aggregates ||
      inputs.size() != other.inputs.size())
    return false;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (!(*inputs[i] == *other.inputs[i])) return false;
  }
  return true;
}

std::string LogicalExpr::to_string() const {
  std::ostringstream out;
  switch (kind) {
    case Kind::Scan:
      out << relation;
      if (alias != relation) out << " AS " << alias;
      break;
    case Kind::Select:
      out << "SELECT ";
      for (std::size_t i = 0; i < predicates.size(); ++i) {
        if (i) out << " AND ";
        out << predicates[i].to_string();
      }
      out << " (" << inputs[0]->to_string() << ")";
      break;
    case Kind::Join:
      out << "(" << inputs[0]->to_string() << " JOIN " << inputs[1]->to_string() << " ON ";
      for (std::size_t i = 0; i < join_predicates.size(); ++i) {
        if (i) out << " AND ";
        out << join_predicates[i].to_string();
      }
      out << ")";
      break;
    case Kind::Aggregate:
      out << "GROUPBY(";
      for (std::size_t i = 0; i < group_columns.size(); ++i) {
        if (i) out << ", ";
        out << group_columns[i];
      }
      out << "; ";
      for (std::size_t i = 0; i < aggregates.size(); ++i) {
        if (i) out << ", ";
        out << aggregates[i].to_string();
      }
      out << ")(" << inputs[0]->to_string() << ")";
      break;
  }
  return out.str();
}

std::vector<ColumnRef> schema_of(const LogicalExpr& expr, const Catalog& catalog) {
  switch (expr.kind) {
    case LogicalExpr::Kind::Scan: {
      const RelationInfo* rel = catalog.find(expr.relation);
      if (rel == nullptr) throw UnknownRelation("unknown relation '" + expr.relation + "'");
      std::vector<ColumnRef> out;
      for (const auto& c : rel->columns) out.push_back({expr.alias + "." + c.name, c.type});
      return out;
    }
    case LogicalExpr::Kind::Select:
      return schema_of(*expr.inputs[0], catalog);
    case LogicalExpr::Kind::Join: {
      auto out = schema_of(*expr.inputs[0], catalog);
      auto right = schema_of(*expr.inputs[1], catalog);
      out.insert(out.end(), right.begin(), right.end());
      return out;
    }
    case LogicalExpr::Kind::Aggregate: {
      auto in = schema_of(*expr.inputs[0], catalog);
      auto type_of = [&](const std::string& name) {
        for (const auto& c : in) {
          if (c.name == name) return c.type;
        }
        throw UnknownColumn("unknown column '" + name + "'");
      };
      std::vector<ColumnRef> out;
      for (const auto& g : expr.group_columns) out.push_back({g, type_of(g)});
      for (const auto& a : expr.aggregates) {
        ColumnType t = ColumnType::Int;
        if (a.func == AggFunc::Sum) t = type_of(a.column);
        if (a.func == AggFunc::Avg) t = ColumnType::Decimal;
        out.push_back({a.output_name(), t});
      }
      out.push_back({kCountColumn, ColumnType::Int});
      return out;
    }
  }
  return {};
}

namespace {

bool is_numeric(ColumnType t) { return t != ColumnType::String; }

ExprPtr normalize_rec(const ExprPtr& expr, std::vector<ColumnPredicate> pending,
                      const std::function<bool(const LogicalExpr&, const std::string&)>& owns) {
  switch (expr->kind) {
    case LogicalExpr::Kind::Scan: {
      if (pending.empty()) return expr;
      std::sort(pending.begin(), pending.end());
      pending.erase(std::unique(pending.begin(), pending.end()), pending.end());
      return LogicalExpr::select(std::move(pending), expr);
    }
    case LogicalExpr::Kind::Select: {
      pending.insert(pending.end(), expr->predicates.begin(), expr->predicates.end());
      return normalize_rec(expr->inputs[0], std::move(pending), owns);
    }
    case LogicalExpr::Kind::Join: {
      std::vector<ColumnPredicate> left, right;
      for (auto& p : pending) {
        if (owns(*expr->inputs[0], p.column))
          left.push_back(p);
        else
          right.push_back(p);
      }
      auto preds = expr->join_predicates;
      std::sort(preds.begin(), preds.end());
      preds.erase(std::unique(preds.begin(), preds.end()), preds.end());
      return LogicalExpr::join(std::move(preds), normalize_rec(expr->inputs[0], left, owns),
                               normalize_rec(expr->inputs[1], right, owns));
    }
    case LogicalExpr::Kind::Aggregate: {
      if (!pending.empty()) throw ValidationError("selection above an aggregate is not supported");
      return LogicalExpr::aggregate(expr->group_columns, expr->aggregates,
                                    normalize_rec(expr->inputs[0], {}, owns));
    }
  }
  return expr;
}

void collect_aliases(const LogicalExpr& e, std::set<std::string>& out) {
  if (e.kind == LogicalExpr::Kind::Scan) out.insert(e.alias);
  for (const auto& in : e.inputs) collect_aliases(*in, out);
}

}  // namespace

ExprPtr normalize(const ExprPtr& expr) {
  auto owns = [](const LogicalExpr& sub, const std::string& column) {
    std::set<std::string> aliases;
    collect_aliases(sub, aliases);
    auto dot = column.find('.');
    return aliases.count(column.substr(0, dot)) > 0;
  };
  return normalize_rec(expr, {}, owns);
}

namespace {

const ColumnRef* lookup(const std::vector<ColumnRef>& schema, const std::string& name) {
  for (const auto& c : schema) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

void validate_rec(const LogicalExpr& e, const Catalog& catalog, bool is_root) {
  for (const auto& in : e.inputs) validate_rec(*in, catalog, false);
  switch (e.kind) {
    case LogicalExpr::Kind::Scan:
      if (catalog.find(e.relation) == nullptr)
        throw UnknownRelation("unknown relation '" + e.relation + "'");
      break;
    case LogicalExpr::Kind::Select: {
      auto schema = schema_of(*e.inputs[0], catalog);
      if (e.inputs[0]->kind == LogicalExpr::Kind::Aggregate)
        throw ValidationError("selection above an aggregate is not supported");
      for (const auto& p : e.predicates) {
        const ColumnRef* c = lookup(schema, p.column);
        if (c == nullptr) throw UnknownColumn("unknown column '" + p.column + "'");
        bool lit_string = std::holds_alternative<std::string>(p.value);
        if (lit_string == is_numeric(c->type))
          throw TypeMismatch("predicate literal type does not match column '" + p.column + "'");
      }
      break;
    }
    case LogicalExpr::Kind::Join: {
      auto left = schema_of(*e.inputs[0], catalog);
      auto right = schema_of(*e.inputs[1], catalog);
      for (const auto& c : left) {
        if (lookup(right, c.name) != nullptr)
          throw ValidationError("alias used twice in one view: '" + c.name + "'");
      }
      if (e.join_predicates.empty()) throw ValidationError("join without predicate");
      for (const auto& p : e.join_predicates) {
        const ColumnRef* a = lookup(left, p.left);
        const ColumnRef* b = lookup(right, p.right);
        if (a == nullptr || b == nullptr) {
          a = lookup(left, p.right);
          b = lookup(right, p.left);
        }
        if (a == nullptr || b == nullptr)
          throw UnknownColumn("join predicate " + p.to_string() + " does not span both inputs");
        if (a->type != b->type) throw TypeMismatch("join columns have different types: " + p.to_string());
      }
      break;
    }
    case LogicalExpr::Kind::Aggregate: {
      if (!is_root) throw ValidationError("aggregate is only supported as the root of a view");
      auto schema = schema_of(*e.inputs[0], catalog);
      for (const auto& g : e.group_columns) {
        if (lookup(schema, g) == nullptr) throw UnknownColumn("unknown column '" + g + "'");
      }
      std::set<std::string> names;
      for (const auto& a : e.aggregates) {
        const ColumnRef* c = lookup(schema, a.column);
        if (c == nullptr) throw UnknownColumn("unknown column '" + a.column + "'");
        if (a.func != AggFunc::Count && !is_numeric(c->type))
          throw TypeMismatch("cannot aggregate string column '" + a.column + "'");
        if (!names.insert(a.output_name()).second)
          throw ValidationError("duplicate aggregate output '" + a.output_name() + "'");
      }
      break;
    }
  }
}

// ---------------------------------------------------------------------------
// Parser

enum class Tok { Ident, Number, String, Symbol, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  std::size_t pos = 0;
};

std::vector<Token> tokenize(const std::string& src) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    std::size_t start = i;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (i < src.size() && (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_')) ++i;
      out.push_back({Tok::Ident, src.substr(start, i - start), start});
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               (c == '-' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      ++i;
      while (i < src.size() && (std::isdigit(static_cast<unsigned char>(src[i])) || src[i] == '.')) ++i;
      out.push_back({Tok::Number, src.substr(start, i - start), start});
    } else if (c == '\'' || c == '"') {
      ++i;
      while (i < src.size() && src[i] != c) ++i;
      if (i >= src.size()) throw SyntaxError("unterminated string literal at " + std::to_string(start));
      out.push_back({Tok::String, src.substr(start + 1, i - start - 1), start});
      ++i;
    } else if ((c == '<' || c == '>') && i + 1 < src.size() && src[i + 1] == '=') {
      out.push_back({Tok::Symbol, src.substr(i, 2), start});
      i += 2;
    } else if (std::string("=<>();,.*").find(c) != std::string::npos) {
      out.push_back({Tok::Symbol, std::string(1, c), start});
      ++i;
    } else {
      throw SyntaxError(std::string("unexpected character '") + c + "' at " + std::to_string(start));
    }
  }
  out.push_back({Tok::End, "", src.size()});
  return out;
}

std::string upper(std::string s) {
  for (auto& ch : s) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return s;
}

class Parser {
 public:
  Parser(const std::string& src, const Catalog& catalog) : toks_(tokenize(src)), catalog_(catalog) {}

  ViewDef parse_definition() {
    ViewDef def;
    def.name = expect_ident("view name");
    expect_symbol("=");
    def.body = parse_expr();
    if (peek().kind != Tok::End) fail("unexpected trailing input");
    return def;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_++]; }

  [[noreturn]] void fail(const std::string& what) const {
    throw SyntaxError(what + " at position " + std::to_string(peek().pos) +
                      (peek().text.empty() ? "" : " near '" + peek().text + "'"));
  }

  bool is_keyword(const char* kw) const {
    return peek().kind == Tok::Ident && upper(peek().text) == kw;
  }
  bool is_symbol(const char* s) const { return peek().kind == Tok::Symbol && peek().text == s; }

  void expect_symbol(const char* s) {
    if (!is_symbol(s)) fail(std::string("expected '") + s + "'");
    ++pos_;
  }
  void expect_keyword(const char* kw) {
    if (!is_keyword(kw)) fail(std::string("expected ") + kw);
    ++pos_;
  }
  std::string expect_ident(const char* what) {
    if (peek().kind != Tok::Ident) fail(std::string("expected ") + what);
    return next().text;
  }

  // expr := primary (JOIN primary ON conj)*
  ExprPtr parse_expr() {
    ExprPtr left = parse_primary();
    while (is_keyword("JOIN")) {
      ++pos_;
      ExprPtr right = parse_primary();
      expect_keyword("ON");
      auto lschema = schema_of(*left, catalog_);
      auto rschema = schema_of(*right, catalog_);
      auto both = lschema;
      both.insert(both.end(), rschema.begin(), rschema.end());
      std::vector<JoinPredicate> preds;
      do {
        std::string a = resolve(parse_column_name(), both);
        expect_symbol("=");
        std::string b = resolve(parse_column_name(), both);
        preds.push_back(JoinPredicate::make(a, b));
      } while (accept_and());
      auto e = LogicalExpr::join(std::move(preds), left, right);
      validate_rec(*e, catalog_, false);
      left = e;
    }
    return left;
  }

  bool accept_and() {
    if (is_keyword("AND")) {
      ++pos_;
      return true;
    }
    return false;
  }

  ExprPtr parse_primary() {
    if (is_symbol("(")) {
      ++pos_;
      ExprPtr e = parse_expr();
      expect_symbol(")");
      return e;
    }
    if (is_keyword("SELECT")) {
      ++pos_;
      std::vector<std::pair<std::string, std::pair<CompareOp, Literal>>> raw;
      do {
        std::string col = parse_column_name();
        CompareOp op = parse_compare_op();
        raw.push_back({col, {op, parse_literal()}});
      } while (accept_and());
      expect_symbol("(");
      ExprPtr input = parse_expr();
      expect_symbol(")");
      auto schema = schema_of(*input, catalog_);
      std::vector<ColumnPredicate> preds;
      for (auto& [col, rest] : raw) preds.push_back({resolve(col, schema), rest.first, rest.second});
      auto e = LogicalExpr::select(std::move(preds), input);
      validate_rec(*e, catalog_, false);
      return e;
    }
    if (is_keyword("GROUPBY")) {
      ++pos_;
      expect_symbol("(");
      std::vector<std::string> groups;
      while (!is_symbol(";")) {
        groups.push_back(parse_column_name());
        if (!is_symbol(";")) expect_symbol(",");
      }
      expect_symbol(";");
      std::vector<std::pair<std::string, std::string>> aggs;
      do {
        std::string fn = expect_ident("aggregate function");
        expect_symbol("(");
        std::string col = is_symbol("*") ? (++pos_, std::string("*")) : parse_column_name();
        expect_symbol(")");
        aggs.push_back({fn, col});
      } while (is_symbol(",") && (++pos_, true));
      expect_symbol(")");
      expect_symbol("(");
      ExprPtr input = parse_expr();
      expect_symbol(")");
      auto schema = schema_of(*input, catalog_);
      for (auto& g : groups) g = resolve(g, schema);
      std::vector<AggregateSpec> specs;
      for (auto& [fn, col] : aggs) {
        std::string f = upper(fn);
        AggregateSpec spec;
        if (f == "COUNT")
          spec.func = AggFunc::Count;
        else if (f == "SUM")
          spec.func = AggFunc::Sum;
        else if (f == "AVG")
          spec.func = AggFunc::Avg;
        else if (f == "MIN" || f == "MAX")
          throw AggregateNotIncremental(fn + " cannot be maintained incrementally under deletes");
        else
          throw SyntaxError("unknown aggregate function '" + fn + "'");
        if (col == "*") {
          if (spec.func != AggFunc::Count) throw SyntaxError("only count accepts *");
          col = schema.front().name;
        }
        spec.column = resolve(col, schema);
        specs.push_back(spec);
      }
      return LogicalExpr::aggregate(std::move(groups), std::move(specs), input);
    }
    if (peek().kind == Tok::Ident) {
      std::string rel = next().text;
      std::string alias;
      if (is_keyword("AS")) {
        ++pos_;
        alias = expect_ident("alias");
      }
      if (catalog_.find(rel) == nullptr) throw UnknownRelation("unknown relation '" + rel + "'");
      return LogicalExpr::scan(rel, alias);
    }
    fail("expected relation, '(', SELECT or GROUPBY");
  }

  std::string parse_column_name() {
    std::string name = expect_ident("column");
    if (is_symbol(".")) {
      ++pos_;
      name += "." + expect_ident("column");
    }
    return name;
  }

  CompareOp parse_compare_op() {
    if (peek().kind != Tok::Symbol) fail("expected comparison operator");
    std::string s = next().text;
    if (s == "=") return CompareOp::Eq;
    if (s == "<") return CompareOp::Lt;
    if (s == "<=") return CompareOp::Le;
    if (s == ">") return CompareOp::Gt;
    if (s == ">=") return CompareOp::Ge;
    --pos_;
    fail("expected comparison operator");
  }

  Literal parse_literal() {
    const Token& t = next();
    if (t.kind == Tok::String) return t.text;
    if (t.kind == Tok::Number) {
      if (t.text.find('.') != std::string::npos) return std::stod(t.text);
      return static_cast<std::int64_t>(std::stoll(t.text));
    }
    --pos_;
    fail("expected literal");
  }

  std::string resolve(const std::string& name, const std::vector<ColumnRef>& schema) const {
    if (name.find('.') != std::string::npos) {
      if (lookup(schema, name) == nullptr) throw UnknownColumn("unknown column '" + name + "'");
      return name;
    }
    const ColumnRef* found = nullptr;
    for (const auto& c : schema) {
      if (unqualified(c.name) == name) {
        if (found != nullptr) throw UnknownColumn("ambiguous column '" + name + "'");
        found = &c;
      }
    }
    if (found == nullptr) throw UnknownColumn("unknown column '" + name + "'");
    return found->name;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  const Catalog& catalog_;
};

}  // namespace

void validate(const LogicalExpr& expr, const Catalog& catalog) { validate_rec(expr, catalog, true); }

ViewDef parse_view(const std::string& source, const Catalog& catalog) {
  Parser parser(source, catalog);
  ViewDef def = parser.parse_definition();
  validate(*def.body, catalog);
  def.body = normalize(def.body);
  return def;
}

std::vector<ViewDef> parse_views(const std::string& text, const Catalog& catalog) {
  std::vector<ViewDef> out;
  std::set<std::string> names;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    ViewDef def = parse_view(line, catalog);
    if (!names.insert(def.name).second) throw ValidationError("duplicate view name '" + def.name + "'");
    out.push_back(std::move(def));
  }
  return out;
}

}  // namespace mvopt
