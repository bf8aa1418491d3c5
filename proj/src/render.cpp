#include "pnsolver/render.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

#include "pnsolver/errors.hpp"

namespace pnsolver::cas {

namespace {

const char* const kAxisNames[3] = {"dx", "dy", "dz"};

bool leading_negative(const Expr& term) {
  if (term.is(Kind::number)) return term.value() < 0.0 || (term.value() == 0.0 && std::signbit(term.value()));
  return term.is(Kind::mul) && !term.children().empty() && term.child(0).is(Kind::number) &&
         term.child(0).value() < 0.0;
}

Expr negated(const Expr& term) {
  if (term.is(Kind::number)) return number(-term.value());
  if (term.is(Kind::mul) && term.child(0).is(Kind::number)) {
    std::vector<Expr> factors(term.children().begin(), term.children().end());
    const double c = -factors.front().value();
    if (c == 1.0)
      factors.erase(factors.begin());
    else
      factors.front() = number(c);
    return product(std::move(factors));
  }
  return product({number(-1.0), term});
}

std::string leaf_text(const Expr& e) {
  std::string s = e.name();
  if (e.index()) s += "[" + std::to_string(e.index()->l) + "," + std::to_string(e.index()->m) + "]";
  if (e.position()) {
    const auto& p = *e.position();
    s += "@(" + std::to_string(p[0]) + "," + std::to_string(p[1]) + "," + std::to_string(p[2]) + ")";
  }
  return s;
}

void pretty(const Expr& e, std::string& out);

void pretty_factor(const Expr& f, bool leading, std::string& out) {
  const bool parens = f.is(Kind::add) || f.is(Kind::mul) || (!leading && leading_negative(f));
  if (parens) out += '(';
  pretty(f, out);
  if (parens) out += ')';
}

void pretty(const Expr& e, std::string& out) {
  switch (e.kind()) {
    case Kind::number:
      out += format_number(e.value());
      return;
    case Kind::symbol:
    case Kind::unknown:
    case Kind::field:
      out += leaf_text(e);
      return;
    case Kind::add: {
      bool first = true;
      for (const auto& t : e.children()) {
        if (first) {
          if (t.is(Kind::add)) {
            out += '(';
            pretty(t, out);
            out += ')';
          } else {
            pretty(t, out);
          }
        } else if (leading_negative(t)) {
          out += " - ";
          const Expr n = negated(t);
          if (n.is(Kind::add) || leading_negative(n)) {
            out += '(';
            pretty(n, out);
            out += ')';
          } else {
            pretty(n, out);
          }
        } else {
          out += " + ";
          if (t.is(Kind::add)) {
            out += '(';
            pretty(t, out);
            out += ')';
          } else {
            pretty(t, out);
          }
        }
        first = false;
      }
      return;
    }
    case Kind::mul: {
      const auto f = e.children();
      std::size_t start = 0;
      if (f.size() >= 2 && f[0].is_number(-1.0)) {
        out += '-';
        start = 1;
        if (leading_negative(f[1]) || f[1].is(Kind::add) || f[1].is(Kind::mul)) {
          // "-(...)" keeps the factor grouping unambiguous
          for (std::size_t i = 1; i < f.size(); ++i) {
            if (i > 1) out += '*';
            pretty_factor(f[i], false, out);
          }
          return;
        }
        pretty_factor(f[1], true, out);
        for (std::size_t i = 2; i < f.size(); ++i) {
          out += '*';
          pretty_factor(f[i], false, out);
        }
        return;
      }
      for (std::size_t i = start; i < f.size(); ++i) {
        if (i > start) out += '*';
        pretty_factor(f[i], i == start, out);
      }
      return;
    }
    case Kind::power: {
      const Expr& base = e.child(0);
      const bool atomic = (base.is(Kind::number) && base.value() >= 0.0) || base.is(Kind::symbol) ||
                          base.is(Kind::unknown) || base.is(Kind::field) || base.is(Kind::derivative) ||
                          base.is(Kind::delta);
      if (!atomic) out += '(';
      pretty(base, out);
      if (!atomic) out += ')';
      out += '^';
      out += std::to_string(e.exponent());
      return;
    }
    case Kind::derivative:
      out += kAxisNames[e.axis()];
      out += '(';
      pretty(e.child(0), out);
      out += ')';
      return;
    case Kind::delta:
      out += "delta(";
      pretty(e.child(0), out);
      out += ',';
      pretty(e.child(1), out);
      out += ')';
      return;
  }
}

class Parser {
 public:
  Parser(std::string_view text, const ParseOptions& options) : text_(text), options_(options) {}

  Expr parse() {
    Expr e = parse_sum();
    skip_space();
    if (pos_ != text_.size()) fail("trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(what + " at offset " + std::to_string(pos_) + " in \"" + std::string(text_) + "\"");
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  int parse_int() {
    skip_space();
    int value = 0;
    const char* begin = text_.data() + pos_;
    auto [ptr, ec] = std::from_chars(begin, text_.data() + text_.size(), value);
    if (ec != std::errc()) fail("expected integer");
    pos_ += static_cast<std::size_t>(ptr - begin);
    return value;
  }

  static Expr negate(const Expr& e) {
    if (e.is(Kind::number)) return number(-e.value());
    if (e.is(Kind::mul) && e.child(0).is(Kind::number)) {
      std::vector<Expr> f(e.children().begin(), e.children().end());
      f.front() = number(-f.front().value());
      return product(std::move(f));
    }
    if (e.is(Kind::mul)) {
      std::vector<Expr> f{number(-1.0)};
      f.insert(f.end(), e.children().begin(), e.children().end());
      return product(std::move(f));
    }
    return product({number(-1.0), e});
  }

  Expr parse_sum() {
    std::vector<Expr> terms{parse_product()};
    for (;;) {
      if (accept('+'))
        terms.push_back(parse_product());
      else if (accept('-'))
        terms.push_back(negate(parse_product()));
      else
        break;
    }
    return sum(std::move(terms));
  }

  Expr parse_product() {
    const bool minus = accept('-');
    std::vector<Expr> factors{parse_power()};
    while (accept('*')) factors.push_back(parse_power());
    if (minus) {
      if (factors.front().is(Kind::number))
        factors.front() = number(-factors.front().value());
      else
        factors.insert(factors.begin(), number(-1.0));
    }
    return product(std::move(factors));
  }

  Expr parse_power() {
    Expr base = parse_atom();
    if (accept('^')) {
      const bool negative = accept('-');
      const int exponent = parse_int();
      return power(std::move(base), negative ? -exponent : exponent);
    }
    return base;
  }

  Expr parse_atom() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = parse_sum();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      double value = 0.0;
      const char* begin = text_.data() + pos_;
      auto [ptr, ec] = std::from_chars(begin, text_.data() + text_.size(), value);
      if (ec != std::errc()) fail("bad number");
      pos_ += static_cast<std::size_t>(ptr - begin);
      return number(value);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        ++pos_;
      const std::string name(text_.substr(start, pos_ - start));
      skip_space();
      if (pos_ < text_.size() && text_[pos_] == '(') {
        for (int axis = 0; axis < 3; ++axis)
          if (name == kAxisNames[axis]) {
            ++pos_;
            Expr operand = parse_sum();
            expect(')');
            return derivative(axis, std::move(operand));
          }
        if (name == "delta") {
          ++pos_;
          Expr i = parse_sum();
          expect(',');
          Expr j = parse_sum();
          expect(')');
          return kronecker_delta(std::move(i), std::move(j));
        }
        fail("unknown function '" + name + "'");
      }
      std::optional<ShIndex> index;
      std::optional<Position> position;
      if (accept('[')) {
        const int l = parse_int();
        expect(',');
        const int m = parse_int();
        expect(']');
        index = ShIndex{l, m};
      }
      if (accept('@')) {
        expect('(');
        Position p{};
        for (int i = 0; i < 3; ++i) {
          if (i > 0) expect(',');
          p[static_cast<size_t>(i)] = parse_int();
        }
        expect(')');
        position = p;
      }
      if (options_.unknown_names.contains(name) && (index || position)) {
        if (!index) fail("unknown '" + name + "' needs an index");
        return unknown(name, *index, position);
      }
      if (index || position || options_.field_names.contains(name)) return field(name, index, position);
      return symbol(name);
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  std::string_view text_;
  const ParseOptions& options_;
  std::size_t pos_ = 0;
};

std::string source_number(double value) {
  std::string s = format_number(value);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  if (value < 0.0) return "(" + s + ")";
  return s;
}

void source(const Expr& e, const LeafRenderer& leaf, std::string& out) {
  switch (e.kind()) {
    case Kind::number:
      out += source_number(e.value());
      return;
    case Kind::symbol:
      out += leaf ? leaf(e) : e.name();
      return;
    case Kind::unknown:
    case Kind::field:
    case Kind::derivative:
      if (!leaf) throw Error("to_source: no renderer for leaf '" + e.name() + "'");
      out += leaf(e);
      return;
    case Kind::add:
    case Kind::mul: {
      const char* op = e.is(Kind::add) ? " + " : " * ";
      out += '(';
      bool first = true;
      for (const auto& c : e.children()) {
        if (!first) out += op;
        source(c, leaf, out);
        first = false;
      }
      out += ')';
      return;
    }
    case Kind::power:
      out += "std::pow(";
      source(e.child(0), leaf, out);
      out += ", " + std::to_string(e.exponent()) + ")";
      return;
    case Kind::delta:
      out += "((";
      source(e.child(0), leaf, out);
      out += ") == (";
      source(e.child(1), leaf, out);
      out += ") ? 1.0 : 0.0)";
      return;
  }
}

}  // namespace

std::string format_number(double value) {
  char buffer[64];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc()) throw Error("format_number failed");
  return std::string(buffer, ptr);
}

std::string to_pretty(const Expr& e) {
  std::string out;
  pretty(e, out);
  return out;
}

Expr parse_pretty(std::string_view text, const ParseOptions& options) { return Parser(text, options).parse(); }

std::string to_source(const Expr& e, const LeafRenderer& leaf) {
  std::string out;
  source(e, leaf, out);
  return out;
}

std::string render(const Expr& e, Frontend frontend) {
  return frontend == Frontend::pretty_text ? to_pretty(e) : to_source(e);
}

std::string emit_canonical_routine(const CanonicalForm& form, std::string_view name, const LeafRenderer& leaf) {
  std::ostringstream os;
  os << "template <class Sample>\n"
     << "inline void " << name
     << "(const Sample& sample, double h, double* coefficients, double& residual) {\n"
     << "  (void)sample;\n  (void)h;\n";
  for (std::size_t i = 0; i < form.entries.size(); ++i) {
    os << "  // " << to_pretty(form.entries[i].unknown) << "\n";
    os << "  coefficients[" << i << "] = " << to_source(form.entries[i].coefficient, leaf) << ";\n";
  }
  os << "  residual = " << to_source(form.residual, leaf) << ";\n";
  os << "}\n";
  return os.str();
}

}  // namespace pnsolver::cas
