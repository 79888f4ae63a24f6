#include "mcalc/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

#include "mcalc/errors.hpp"

namespace mcalc {

namespace {

// Recursive-descent parser over a numeric codomain. Closures are built
// directly; there is no separate AST because nothing rewrites expressions.
struct NumParser {
  const std::string& s;
  size_t pos = 0;

  explicit NumParser(const std::string& src) : s(src) {}

  void skip() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }
  bool eat(char c) {
    skip();
    if (pos < s.size() && s[pos] == c) { ++pos; return true; }
    return false;
  }
  [[noreturn]] void bad(const std::string& what) {
    fail(Err::Schema, "bad function expression at offset " + std::to_string(pos) + ": " + what);
  }

  using F = std::function<double(const Point&)>;

  F parse_expr() {
    F acc = parse_term();
    for (;;) {
      if (eat('+')) {
        F rhs = parse_term();
        acc = [acc, rhs](const Point& p) { return acc(p) + rhs(p); };
      } else if (eat('-')) {
        F rhs = parse_term();
        acc = [acc, rhs](const Point& p) { return acc(p) - rhs(p); };
      } else {
        return acc;
      }
    }
  }

  F parse_term() {
    F acc = parse_unary();
    for (;;) {
      if (eat('*')) {
        F rhs = parse_unary();
        acc = [acc, rhs](const Point& p) { return acc(p) * rhs(p); };
      } else if (eat('/')) {
        F rhs = parse_unary();
        acc = [acc, rhs](const Point& p) { return acc(p) / rhs(p); };
      } else {
        return acc;
      }
    }
  }

  F parse_unary() {
    if (eat('-')) {
      F inner = parse_unary();
      return [inner](const Point& p) { return -inner(p); };
    }
    return parse_power();
  }

  F parse_power() {
    F base = parse_primary();
    if (eat('^')) {
      F ex = parse_unary();
      return [base, ex](const Point& p) { return std::pow(base(p), ex(p)); };
    }
    return base;
  }

  F parse_primary() {
    skip();
    if (pos >= s.size()) bad("unexpected end of input");
    char c = s[pos];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* start = s.c_str() + pos;
      char* end = nullptr;
      double v = std::strtod(start, &end);
      if (end == start) bad("expected a number");
      pos += static_cast<size_t>(end - start);
      return [v](const Point&) { return v; };
    }
    if (c == '(') {
      ++pos;
      F inner = parse_expr();
      if (!eat(')')) bad("expected ')'");
      return inner;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      size_t start = pos;
      while (pos < s.size() && std::isalpha(static_cast<unsigned char>(s[pos]))) ++pos;
      std::string name = s.substr(start, pos - start);
      if (name == "x") return [](const Point& p) { return p.x; };
      if (name == "y") return [](const Point& p) { return p.y; };
      F arg = [this, &name]() {
        if (!eat('(')) bad("expected '(' after '" + name + "'");
        F inner = parse_expr();
        if (!eat(')')) bad("expected ')'");
        return inner;
      }();
      if (name == "exp") return [arg](const Point& p) { return std::exp(arg(p)); };
      if (name == "log") return [arg](const Point& p) { return std::log(arg(p)); };
      if (name == "abs") return [arg](const Point& p) { return std::fabs(arg(p)); };
      if (name == "sqrt") return [arg](const Point& p) { return std::sqrt(arg(p)); };
      if (name == "sin") return [arg](const Point& p) { return std::sin(arg(p)); };
      if (name == "cos") return [arg](const Point& p) { return std::cos(arg(p)); };
      bad("unknown function '" + name + "'");
    }
    bad(std::string("unexpected character '") + c + "'");
  }
};

// Formal parser: atoms from the codomain alphabet joined by '+', with the
// codomain op. Parenthesization controls the tree shape; '+' without parens
// associates left, matching ordered folds elsewhere.
struct FreeParser {
  const std::string& s;
  const MagmaPtr& cod;
  size_t pos = 0;

  FreeParser(const std::string& src, const MagmaPtr& codomain) : s(src), cod(codomain) {}

  void skip() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }
  [[noreturn]] void bad(const std::string& what) {
    fail(Err::Schema, "bad formal expression at offset " + std::to_string(pos) + ": " + what);
  }

  Value parse_expr() {
    Value acc = parse_primary();
    for (;;) {
      skip();
      if (pos < s.size() && s[pos] == '+') {
        ++pos;
        acc = cod->op(acc, parse_primary());
      } else {
        return acc;
      }
    }
  }

  Value parse_primary() {
    skip();
    if (pos >= s.size()) bad("unexpected end of input");
    if (s[pos] == '(') {
      ++pos;
      Value inner = parse_expr();
      skip();
      if (pos >= s.size() || s[pos] != ')') bad("expected ')'");
      ++pos;
      return inner;
    }
    char c = s[pos];
    if (std::isalnum(static_cast<unsigned char>(c))) {
      Value v = FreeTerm::atom(std::string(1, c));
      if (!cod->contains(v)) bad(std::string("atom '") + c + "' is outside the alphabet");
      ++pos;
      return v;
    }
    bad(std::string("unexpected character '") + c + "'");
  }
};

std::string trimmed(const std::string& src) {
  size_t a = src.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = src.find_last_not_of(" \t\r\n");
  return src.substr(a, b - a + 1);
}

}  // namespace

FunctionExpr FunctionExpr::parse(const std::string& src, MagmaPtr codomain) {
  if (!codomain) fail(Err::Schema, "function expression needs a codomain");
  std::string disp = trimmed(src);
  if (disp.empty()) fail(Err::Schema, "empty function expression");
  if (codomain->id().rfind("free:", 0) == 0) {
    FreeParser p(disp, codomain);
    Value v = p.parse_expr();
    p.skip();
    if (p.pos != disp.size()) p.bad("trailing input");
    return FunctionExpr(disp, [v](const Point&) { return v; }, std::move(codomain));
  }
  NumParser p(disp);
  auto f = p.parse_expr();
  p.skip();
  if (p.pos != disp.size()) p.bad("trailing input");
  return FunctionExpr(disp, [f](const Point& pt) -> Value { return f(pt); }, std::move(codomain));
}

FunctionExpr FunctionExpr::constant(Value v, MagmaPtr codomain) {
  if (!codomain) fail(Err::Schema, "function expression needs a codomain");
  return FunctionExpr(value_str(v), [v](const Point&) { return v; }, std::move(codomain));
}

FunctionExpr FunctionExpr::named(std::string display, Fn fn, MagmaPtr codomain) {
  if (!fn || !codomain) fail(Err::Schema, "named function needs a callable and a codomain");
  return FunctionExpr(std::move(display), std::move(fn), std::move(codomain));
}

FunctionExpr FunctionExpr::piecewise(std::vector<std::pair<Region, FunctionExpr>> pieces,
                                     MagmaPtr codomain) {
  if (!codomain) fail(Err::Schema, "function expression needs a codomain");
  if (pieces.empty()) fail(Err::Schema, "piecewise function needs at least one piece");
  for (size_t i = 0; i < pieces.size(); ++i) {
    if (pieces[i].second.codomain()->id() != codomain->id())
      fail(Err::Schema, "piecewise piece codomain mismatch");
    for (size_t j = i + 1; j < pieces.size(); ++j) {
      Region both = region_intersect(pieces[i].first, pieces[j].first);
      // Shared seam cells of zero content are tolerated; earlier pieces win there.
      bool essential = false;
      for (const Cell& c : both.cells())
        if (!cell_degenerate(c)) essential = true;
      if (essential)
        fail(Err::Schema, "piecewise pieces overlap on a set of positive content");
    }
  }
  std::string disp = "piecewise[";
  for (size_t i = 0; i < pieces.size(); ++i) {
    if (i) disp += "; ";
    disp += pieces[i].first.str() + " -> " + pieces[i].second.str();
  }
  disp += "]";
  Value ident = codomain->identity();
  auto shared = std::make_shared<std::vector<std::pair<Region, FunctionExpr>>>(std::move(pieces));
  Fn fn = [shared, ident](const Point& p) -> Value {
    for (const auto& [r, f] : *shared)
      if (region_contains_point(r, p)) return f.eval(p);
    return ident;
  };
  return FunctionExpr(std::move(disp), std::move(fn), std::move(codomain));
}

Value FunctionExpr::eval(const Point& p) const { return fn_(p); }

}  // namespace mcalc
