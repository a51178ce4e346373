#include "roc/exprlang.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <map>

namespace roc {

namespace detail {

struct ExprNode {
  enum class Kind { Literal, Var, Unary, Binary, Call };
  Kind kind;
  double value = 0.0;       // Literal
  std::string name;         // Var / Call
  char op = 0;              // Binary: + - * / ^ ; Unary: -
  std::vector<std::shared_ptr<const ExprNode>> args;
  std::size_t pos = 0;      // byte offset of the node in the source
  std::size_t len = 0;
};

}  // namespace detail

using detail::ExprNode;
using NodePtr = std::shared_ptr<const ExprNode>;

namespace {

enum Op {
  kConst, kVar, kAdd, kSub, kMul, kDiv, kPow, kNeg,
  kLog, kExp, kSqrt, kAbs, kMin, kMax,
};

struct FnInfo {
  int arity;
  Op op;
};

const std::map<std::string, FnInfo, std::less<>>& function_table() {
  static const std::map<std::string, FnInfo, std::less<>> table = {
      {"log", {1, kLog}},  {"exp", {1, kExp}}, {"sqrt", {1, kSqrt}},
      {"abs", {1, kAbs}},  {"min", {2, kMin}}, {"max", {2, kMax}},
      {"pow", {2, kPow}},
  };
  return table;
}

struct Token {
  enum Type { Num, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma, End };
  Type type;
  double num = 0.0;
  std::string text;
  std::size_t pos = 0;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) { advance(); }
  const Token& peek() const { return cur_; }
  Token take() {
    Token t = cur_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (i_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[i_]))) ++i_;
    cur_.pos = i_;
    if (i_ >= src_.size()) {
      cur_.type = Token::End;
      cur_.text = "end of input";
      return;
    }
    const char c = src_[i_];
    switch (c) {
      case '+': cur_ = {Token::Plus, 0, "+", i_++}; return;
      case '-': cur_ = {Token::Minus, 0, "-", i_++}; return;
      case '*': cur_ = {Token::Star, 0, "*", i_++}; return;
      case '/': cur_ = {Token::Slash, 0, "/", i_++}; return;
      case '^': cur_ = {Token::Caret, 0, "^", i_++}; return;
      case '(': cur_ = {Token::LParen, 0, "(", i_++}; return;
      case ')': cur_ = {Token::RParen, 0, ")", i_++}; return;
      case ',': cur_ = {Token::Comma, 0, ",", i_++}; return;
      default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      double value = 0.0;
      const char* begin = src_.data() + i_;
      const char* end = src_.data() + src_.size();
      auto [ptr, ec] = std::from_chars(begin, end, value);
      if (ec != std::errc{} || ptr == begin)
        throw ParseError("syntax error at offset " + std::to_string(i_) + ": malformed number",
                         i_, "number");
      cur_.type = Token::Num;
      cur_.num = value;
      cur_.text = std::string(begin, ptr);
      cur_.pos = i_;
      i_ += static_cast<std::size_t>(ptr - begin);
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i_;
      while (j < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[j])) || src_[j] == '_'))
        ++j;
      cur_.type = Token::Ident;
      cur_.text = std::string(src_.substr(i_, j - i_));
      cur_.pos = i_;
      i_ = j;
      return;
    }
    throw ParseError("syntax error at offset " + std::to_string(i_) + ": unexpected character '" +
                         std::string(1, c) + "'",
                     i_, "expression");
  }

  std::string_view src_;
  std::size_t i_ = 0;
  Token cur_;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : lex_(src), src_len_(src.size()) {}

  NodePtr run() {
    NodePtr e = expr();
    if (lex_.peek().type != Token::End)
      throw ParseError("syntax error at offset " + std::to_string(lex_.peek().pos) +
                           ": expected operator or end of input, found '" + lex_.peek().text + "'",
                       lex_.peek().pos, "'+' '-' '*' '/' '^' ')' ',' end");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& expected) {
    const Token& t = lex_.peek();
    throw ParseError("syntax error at offset " + std::to_string(t.pos) + ": expected " + expected +
                         ", found '" + t.text + "'",
                     t.pos, expected);
  }

  void expect(Token::Type type, const std::string& what) {
    if (lex_.peek().type != type) fail(what);
    lex_.take();
  }

  static NodePtr make_binary(char op, NodePtr lhs, NodePtr rhs) {
    auto node = std::make_shared<ExprNode>();
    node->kind = ExprNode::Kind::Binary;
    node->op = op;
    node->pos = lhs->pos;
    node->len = rhs->pos + rhs->len - lhs->pos;
    node->args = {std::move(lhs), std::move(rhs)};
    return node;
  }

  NodePtr expr() {
    NodePtr lhs = term();
    while (lex_.peek().type == Token::Plus || lex_.peek().type == Token::Minus) {
      const char op = lex_.take().type == Token::Plus ? '+' : '-';
      lhs = make_binary(op, std::move(lhs), term());
    }
    return lhs;
  }

  NodePtr term() {
    NodePtr lhs = factor();
    while (lex_.peek().type == Token::Star || lex_.peek().type == Token::Slash) {
      const char op = lex_.take().type == Token::Star ? '*' : '/';
      lhs = make_binary(op, std::move(lhs), factor());
    }
    return lhs;
  }

  // factor handles unary minus; '^' binds tighter and is right-associative.
  NodePtr factor() {
    if (lex_.peek().type == Token::Minus) {
      const std::size_t pos = lex_.take().pos;
      NodePtr operand = factor();
      auto node = std::make_shared<ExprNode>();
      node->kind = ExprNode::Kind::Unary;
      node->op = '-';
      node->pos = pos;
      node->len = operand->pos + operand->len - pos;
      node->args = {std::move(operand)};
      return node;
    }
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (lex_.peek().type == Token::Caret) {
      lex_.take();
      return make_binary('^', std::move(base), factor());
    }
    return base;
  }

  NodePtr primary() {
    const Token& t = lex_.peek();
    if (t.type == Token::Num) {
      Token tok = lex_.take();
      auto node = std::make_shared<ExprNode>();
      node->kind = ExprNode::Kind::Literal;
      node->value = tok.num;
      node->pos = tok.pos;
      node->len = tok.text.size();
      return node;
    }
    if (t.type == Token::LParen) {
      lex_.take();
      NodePtr inner = expr();
      expect(Token::RParen, "')'");
      return inner;
    }
    if (t.type == Token::Ident) {
      Token tok = lex_.take();
      if (lex_.peek().type == Token::LParen) {
        const auto& table = function_table();
        auto it = table.find(tok.text);
        if (it == table.end())
          throw ParseError("unknown function '" + tok.text + "' at offset " +
                               std::to_string(tok.pos),
                           tok.pos, "log exp sqrt abs min max pow");
        lex_.take();
        std::vector<NodePtr> args;
        args.push_back(expr());
        while (lex_.peek().type == Token::Comma) {
          lex_.take();
          args.push_back(expr());
        }
        const std::size_t close = lex_.peek().pos;
        expect(Token::RParen, "')'");
        if (static_cast<int>(args.size()) != it->second.arity)
          throw ParseError("function '" + tok.text + "' expects " +
                               std::to_string(it->second.arity) + " argument(s), got " +
                               std::to_string(args.size()),
                           tok.pos, "argument list");
        auto node = std::make_shared<ExprNode>();
        node->kind = ExprNode::Kind::Call;
        node->name = tok.text;
        node->pos = tok.pos;
        node->len = close + 1 - tok.pos;
        node->args = std::move(args);
        return node;
      }
      auto node = std::make_shared<ExprNode>();
      node->kind = ExprNode::Kind::Var;
      node->name = tok.text;
      node->pos = tok.pos;
      node->len = tok.text.size();
      return node;
    }
    fail("a number, variable, function call, '(' or '-'");
  }

  Lexer lex_;
  std::size_t src_len_;
};

int precedence(const ExprNode& node) {
  switch (node.kind) {
    case ExprNode::Kind::Binary:
      if (node.op == '+' || node.op == '-') return 1;
      if (node.op == '*' || node.op == '/') return 2;
      return 4;  // '^'
    case ExprNode::Kind::Unary:
      return 3;
    default:
      return 5;
  }
}

std::string format_number(double v) {
  std::array<char, 40> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

void print_node(const ExprNode& node, std::string& out) {
  auto child = [&](const ExprNode& c, bool parens) {
    if (parens) out.push_back('(');
    print_node(c, out);
    if (parens) out.push_back(')');
  };
  switch (node.kind) {
    case ExprNode::Kind::Literal:
      out += format_number(node.value);
      return;
    case ExprNode::Kind::Var:
      out += node.name;
      return;
    case ExprNode::Kind::Unary:
      out.push_back('-');
      child(*node.args[0], precedence(*node.args[0]) < 3);
      return;
    case ExprNode::Kind::Binary: {
      const int p = precedence(node);
      const ExprNode& l = *node.args[0];
      const ExprNode& r = *node.args[1];
      if (node.op == '^') {
        child(l, precedence(l) <= 4);
        out.push_back('^');
        child(r, precedence(r) < 3);
      } else {
        child(l, precedence(l) < p);
        out.push_back(' ');
        out.push_back(node.op);
        out.push_back(' ');
        child(r, precedence(r) <= p);
      }
      return;
    }
    case ExprNode::Kind::Call: {
      out += node.name;
      out.push_back('(');
      for (std::size_t i = 0; i < node.args.size(); ++i) {
        if (i) out += ", ";
        print_node(*node.args[i], out);
      }
      out.push_back(')');
      return;
    }
  }
}

bool nodes_equal(const ExprNode& a, const ExprNode& b) {
  if (a.kind != b.kind || a.op != b.op || a.name != b.name || a.args.size() != b.args.size())
    return false;
  if (a.kind == ExprNode::Kind::Literal && a.value != b.value) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!nodes_equal(*a.args[i], *b.args[i])) return false;
  return true;
}

void collect_vars(const ExprNode& node, std::vector<std::string>& out) {
  if (node.kind == ExprNode::Kind::Var) {
    for (const auto& s : out)
      if (s == node.name) return;
    out.push_back(node.name);
    return;
  }
  for (const auto& c : node.args) collect_vars(*c, out);
}

[[noreturn]] void domain_fail(const ExprNode& node, const std::string& what) {
  std::string expr_text;
  print_node(node, expr_text);
  throw DomainError(what + " in '" + expr_text + "' at offset " + std::to_string(node.pos));
}

double apply_pow(double base, double exponent, const ExprNode& node) {
  if (base < 0.0) {
    if (std::nearbyint(exponent) != exponent)
      domain_fail(node, "negative base with non-integer exponent");
  }
  return std::pow(base, exponent);
}

struct CompileCtx {
  std::vector<BoundExpr::Instr>* prog;
  std::span<const std::string> names;
};

int compile_node(const ExprNode& node, CompileCtx& ctx) {
  using I = BoundExpr::Instr;
  switch (node.kind) {
    case ExprNode::Kind::Literal:
      ctx.prog->push_back(I{kConst, node.value, 0, &node});
      return 1;
    case ExprNode::Kind::Var: {
      int slot = -1;
      for (std::size_t i = 0; i < ctx.names.size(); ++i)
        if (ctx.names[i] == node.name) slot = static_cast<int>(i);
      if (slot < 0) throw EvalError("unbound variable '" + node.name + "' at offset " +
                                    std::to_string(node.pos));
      ctx.prog->push_back(I{kVar, 0.0, slot, &node});
      return 1;
    }
    case ExprNode::Kind::Unary: {
      const int d = compile_node(*node.args[0], ctx);
      ctx.prog->push_back(I{kNeg, 0.0, 0, &node});
      return d;
    }
    case ExprNode::Kind::Binary: {
      const int dl = compile_node(*node.args[0], ctx);
      const int dr = compile_node(*node.args[1], ctx);
      Op op = kAdd;
      if (node.op == '-') op = kSub;
      else if (node.op == '*') op = kMul;
      else if (node.op == '/') op = kDiv;
      else if (node.op == '^') op = kPow;
      ctx.prog->push_back(I{op, 0.0, 0, &node});
      return std::max(dl, 1 + dr);
    }
    case ExprNode::Kind::Call: {
      const Op op = function_table().at(node.name).op;
      int depth = 0;
      for (std::size_t i = 0; i < node.args.size(); ++i)
        depth = std::max(depth, static_cast<int>(i) + compile_node(*node.args[i], ctx));
      ctx.prog->push_back(I{op, 0.0, 0, &node});
      return depth;
    }
  }
  throw EvalError("corrupt expression tree");
}

}  // namespace

double BoundExpr::eval(std::span<const double> values) const {
  std::array<double, 128> stack;
  int top = 0;
  for (const auto& in : prog_) {
    switch (in.op) {
      case kConst: stack[top++] = in.k; break;
      case kVar: stack[top++] = values[static_cast<std::size_t>(in.slot)]; break;
      case kNeg: stack[top - 1] = -stack[top - 1]; break;
      case kAdd: --top; stack[top - 1] += stack[top]; break;
      case kSub: --top; stack[top - 1] -= stack[top]; break;
      case kMul: --top; stack[top - 1] *= stack[top]; break;
      case kDiv: --top; stack[top - 1] /= stack[top]; break;
      case kPow:
        --top;
        stack[top - 1] = apply_pow(stack[top - 1], stack[top], *in.src);
        break;
      case kLog:
        if (stack[top - 1] <= 0.0) domain_fail(*in.src, "log of non-positive argument");
        stack[top - 1] = std::log(stack[top - 1]);
        break;
      case kExp: stack[top - 1] = std::exp(stack[top - 1]); break;
      case kSqrt:
        if (stack[top - 1] < 0.0) domain_fail(*in.src, "sqrt of negative argument");
        stack[top - 1] = std::sqrt(stack[top - 1]);
        break;
      case kAbs: stack[top - 1] = std::abs(stack[top - 1]); break;
      case kMin: --top; stack[top - 1] = std::min(stack[top - 1], stack[top]); break;
      case kMax: --top; stack[top - 1] = std::max(stack[top - 1], stack[top]); break;
      default: throw EvalError("corrupt expression program");
    }
  }
  return stack[0];
}

Expr Expr::parse(std::string_view source) {
  Parser p(source);
  Expr e;
  e.root_ = p.run();
  e.source_ = std::string(source);
  return e;
}

BoundExpr Expr::bind(std::span<const std::string> names) const {
  BoundExpr b;
  b.root_ = root_;
  b.source_ = source_;
  b.slots_ = static_cast<int>(names.size());
  CompileCtx ctx{&b.prog_, names};
  b.max_depth_ = compile_node(*root_, ctx);
  if (b.max_depth_ > 127) throw EvalError("expression too deeply nested");
  return b;
}

double Expr::eval(std::span<const std::string> names, std::span<const double> values) const {
  if (names.size() != values.size()) throw InputError("eval: names/values size mismatch");
  return bind(names).eval(values);
}

std::string Expr::pretty() const {
  std::string out;
  print_node(*root_, out);
  return out;
}

bool Expr::same_structure(const Expr& other) const { return nodes_equal(*root_, *other.root_); }

std::vector<std::string> Expr::variables() const {
  std::vector<std::string> out;
  collect_vars(*root_, out);
  return out;
}

}  // namespace roc
