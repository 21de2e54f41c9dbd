// Copyright 2026 The rtcg-kit Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef RTCG_CSYNTAX_AST_HPP
#define RTCG_CSYNTAX_AST_HPP

// A small C syntax tree covering what generated kernels need, plus a raw-text
// escape hatch. emit() is deterministic: 4-space indentation, one statement
// per line, K&R braces for control flow, function braces on their own line.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rtcg/error.hpp"

namespace rtcg::csyntax {

struct CType {
  std::string base;       // e.g. "float", "unsigned int", "void"
  int pointer_depth = 0;
  bool is_const = false;  // qualifies the pointee (or the value for depth 0)

  /// Declarator text, e.g. `const float *x`. An empty name yields the
  /// abstract type, e.g. `const float *`.
  std::string declare(std::string_view name) const {
    std::string s;
    if (is_const)
      s += "const ";
    s += base;
    if (pointer_depth > 0 || !name.empty())
      s += ' ';
    s.append(static_cast<std::size_t>(pointer_depth), '*');
    s += name;
    return s;
  }

  CType pointer() const { return {base, pointer_depth + 1, is_const}; }
  CType as_const() const { return {base, pointer_depth, true}; }

  friend bool operator==(const CType &, const CType &) = default;
};

enum class NodeKind {
  TranslationUnit,
  FunctionDef,
  Parameter,
  Declaration,
  ForLoop,
  If,
  Assignment,
  Call,
  BinaryOp,
  Literal,
  Identifier,
  Index,
  Block,
  Raw,
};

inline std::string_view kind_name(NodeKind k) {
  switch (k) {
  case NodeKind::TranslationUnit: return "translation-unit";
  case NodeKind::FunctionDef: return "function-def";
  case NodeKind::Parameter: return "parameter";
  case NodeKind::Declaration: return "typed-declaration";
  case NodeKind::ForLoop: return "for-loop";
  case NodeKind::If: return "if";
  case NodeKind::Assignment: return "assignment";
  case NodeKind::Call: return "call";
  case NodeKind::BinaryOp: return "binary-op";
  case NodeKind::Literal: return "literal";
  case NodeKind::Identifier: return "identifier";
  case NodeKind::Index: return "index";
  case NodeKind::Block: return "block";
  case NodeKind::Raw: return "raw-text";
  }
  return "?";
}

/// Child layout per kind:
///   TranslationUnit  items (FunctionDef | Declaration | Raw)
///   FunctionDef      text=name, type=return type; Parameter..., Block
///   Parameter        text=name, type
///   Declaration      text=name, type; optional initializer expression
///   ForLoop          init, condition, step, Block  (init/step: Declaration,
///                    Assignment, or expression; Raw "" for an empty slot)
///   If               condition, Block [, Block]
///   Assignment       text=operator ("=", "+=", ...); lvalue, value
///   Call             text=callee; argument expressions
///   BinaryOp         text=operator; lhs, rhs
///   Literal/Identifier/Raw  text only
///   Index            base, subscript
///   Block            statements
struct Node {
  NodeKind kind = NodeKind::Raw;
  std::string text;
  std::optional<CType> type;
  std::vector<Node> children;

  friend bool operator==(const Node &, const Node &) = default;
};

namespace ast {

inline Node translation_unit(std::vector<Node> items) {
  return {NodeKind::TranslationUnit, {}, std::nullopt, std::move(items)};
}
inline Node param(CType type, std::string name) {
  return {NodeKind::Parameter, std::move(name), std::move(type), {}};
}
inline Node block(std::vector<Node> statements) {
  return {NodeKind::Block, {}, std::nullopt, std::move(statements)};
}
inline Node function(CType ret, std::string name, std::vector<Node> params, Node body) {
  params.push_back(std::move(body));
  return {NodeKind::FunctionDef, std::move(name), std::move(ret), std::move(params)};
}
inline Node decl(CType type, std::string name) {
  return {NodeKind::Declaration, std::move(name), std::move(type), {}};
}
inline Node decl(CType type, std::string name, Node init) {
  return {NodeKind::Declaration, std::move(name), std::move(type), {std::move(init)}};
}
inline Node raw(std::string text) { return {NodeKind::Raw, std::move(text), std::nullopt, {}}; }
inline Node id(std::string name) {
  return {NodeKind::Identifier, std::move(name), std::nullopt, {}};
}
inline Node lit(std::string text) {
  return {NodeKind::Literal, std::move(text), std::nullopt, {}};
}
inline Node lit(std::int64_t v) { return lit(std::to_string(v)); }
inline Node index(Node base, Node subscript) {
  return {NodeKind::Index, {}, std::nullopt, {std::move(base), std::move(subscript)}};
}
inline Node binary(std::string op, Node lhs, Node rhs) {
  return {NodeKind::BinaryOp, std::move(op), std::nullopt, {std::move(lhs), std::move(rhs)}};
}
inline Node assign(Node lhs, Node rhs, std::string op = "=") {
  return {NodeKind::Assignment, std::move(op), std::nullopt, {std::move(lhs), std::move(rhs)}};
}
inline Node call(std::string callee, std::vector<Node> args) {
  return {NodeKind::Call, std::move(callee), std::nullopt, std::move(args)};
}
inline Node for_loop(Node init, Node cond, Node step, Node body) {
  return {NodeKind::ForLoop,
          {},
          std::nullopt,
          {std::move(init), std::move(cond), std::move(step), std::move(body)}};
}
/// `for (long var = start; var < end; ++var)`
inline Node for_range(std::string var, Node start, Node end, Node body,
                      CType index_type = {"long"}) {
  auto cond = binary("<", id(var), std::move(end));
  auto step = raw("++" + var);
  return for_loop(decl(std::move(index_type), var, std::move(start)), std::move(cond),
                  std::move(step), std::move(body));
}
inline Node if_(Node cond, Node then_block) {
  return {NodeKind::If, {}, std::nullopt, {std::move(cond), std::move(then_block)}};
}
inline Node if_(Node cond, Node then_block, Node else_block) {
  return {NodeKind::If,
          {},
          std::nullopt,
          {std::move(cond), std::move(then_block), std::move(else_block)}};
}

} // namespace ast

namespace detail {

// C binary operator precedence; higher binds tighter.
inline int precedence(std::string_view op) {
  if (op == "*" || op == "/" || op == "%") return 10;
  if (op == "+" || op == "-") return 9;
  if (op == "<<" || op == ">>") return 8;
  if (op == "<" || op == "<=" || op == ">" || op == ">=") return 7;
  if (op == "==" || op == "!=") return 6;
  if (op == "&") return 5;
  if (op == "^") return 4;
  if (op == "|") return 3;
  if (op == "&&") return 2;
  if (op == "||") return 1;
  return -1;
}

inline bool is_expression(NodeKind k) {
  return k == NodeKind::Call || k == NodeKind::BinaryOp || k == NodeKind::Literal ||
         k == NodeKind::Identifier || k == NodeKind::Index || k == NodeKind::Raw;
}

inline bool is_statement(NodeKind k) {
  return k == NodeKind::Declaration || k == NodeKind::ForLoop || k == NodeKind::If ||
         k == NodeKind::Assignment || k == NodeKind::Call || k == NodeKind::Block ||
         k == NodeKind::Raw;
}

class Emitter {
public:
  std::string run(const Node &root) {
    path_.clear();
    if (root.kind == NodeKind::TranslationUnit) {
      with(root, 0, [&] { translation_unit(root); });
    } else if (root.kind == NodeKind::FunctionDef) {
      with(root, 0, [&] { function(root); });
    } else if (is_statement(root.kind)) {
      with(root, 0, [&] { statement(root, 0); });
    } else if (is_expression(root.kind)) {
      with(root, 0, [&] { out_ += expression(root); });
    } else {
      fail("cannot emit a " + std::string(kind_name(root.kind)) + " at top level");
    }
    return std::move(out_);
  }

private:
  template <class F> void with(const Node &n, std::size_t idx, F &&f) {
    path_.push_back(std::string(kind_name(n.kind)) + "[" + std::to_string(idx) + "]");
    f();
    path_.pop_back();
  }

  [[noreturn]] void fail(const std::string &what) const {
    std::string p;
    for (const auto &seg : path_) {
      if (!p.empty())
        p += '/';
      p += seg;
    }
    throw IllFormedTree(p.empty() ? "<root>" : p, what);
  }

  void expect_children(const Node &n, std::size_t lo, std::size_t hi) const {
    if (n.children.size() < lo || n.children.size() > hi)
      fail("expected " + std::to_string(lo) + (lo == hi ? "" : ".." + std::to_string(hi)) +
           " children, found " + std::to_string(n.children.size()));
  }

  void expect_name(const Node &n) const {
    if (n.text.empty())
      fail("missing name");
  }

  void expect_type(const Node &n) const {
    if (!n.type || n.type->base.empty())
      fail("missing type");
  }

  void translation_unit(const Node &tu) {
    for (std::size_t k = 0; k < tu.children.size(); ++k) {
      const auto &item = tu.children[k];
      if (k > 0)
        out_ += '\n';
      with(item, k, [&] {
        switch (item.kind) {
        case NodeKind::FunctionDef: function(item); break;
        case NodeKind::Declaration: line(0, declaration(item) + ";"); break;
        case NodeKind::Raw: raw_lines(0, item.text); break;
        default:
          fail(std::string(kind_name(item.kind)) + " is not allowed at file scope");
        }
      });
    }
  }

  void function(const Node &fn) {
    expect_name(fn);
    expect_type(fn);
    if (fn.children.empty() || fn.children.back().kind != NodeKind::Block)
      fail("function body must be a block");
    std::string head = fn.type->declare(fn.text) + "(";
    const auto nparams = fn.children.size() - 1;
    if (nparams == 0)
      head += "void";
    for (std::size_t k = 0; k < nparams; ++k) {
      const auto &p = fn.children[k];
      with(p, k, [&] {
        if (p.kind != NodeKind::Parameter)
          fail("expected parameter");
        expect_name(p);
        expect_type(p);
        if (!p.children.empty())
          fail("parameter takes no children");
        if (k > 0)
          head += ", ";
        head += p.type->declare(p.text);
      });
    }
    head += ")";
    line(0, head);
    with(fn.children.back(), nparams, [&] { braced_block(fn.children.back(), 0, false); });
  }

  // Emits "{", statements, "}" with the opening brace on its own line
  // (function bodies) or appended to the previous line (control flow).
  void braced_block(const Node &b, int depth, bool inline_open) {
    if (inline_open)
      out_ += " {\n";
    else
      line(depth, "{");
    for (std::size_t k = 0; k < b.children.size(); ++k)
      with(b.children[k], k, [&] { statement(b.children[k], depth + 1); });
    line(depth, "}");
  }

  void statement(const Node &s, int depth) {
    switch (s.kind) {
    case NodeKind::Declaration: line(depth, declaration(s) + ";"); break;
    case NodeKind::Assignment: line(depth, assignment(s) + ";"); break;
    case NodeKind::Call: line(depth, expression(s) + ";"); break;
    case NodeKind::Raw: raw_lines(depth, s.text); break;
    case NodeKind::Block: braced_block(s, depth, false); break;
    case NodeKind::ForLoop: {
      expect_children(s, 4, 4);
      std::string head = "for (";
      with(s.children[0], 0, [&] { head += clause(s.children[0]); });
      head += "; ";
      with(s.children[1], 1, [&] { head += condition(s.children[1]); });
      head += "; ";
      with(s.children[2], 2, [&] { head += clause(s.children[2]); });
      head += ")";
      indent(depth);
      out_ += head;
      with(s.children[3], 3, [&] { control_body(s.children[3], depth); });
      break;
    }
    case NodeKind::If: {
      expect_children(s, 2, 3);
      std::string head;
      with(s.children[0], 0, [&] { head = "if (" + expression(s.children[0]) + ")"; });
      indent(depth);
      out_ += head;
      with(s.children[1], 1, [&] { control_body(s.children[1], depth); });
      if (s.children.size() == 3) {
        out_.pop_back(); // join "} else {" on one line
        out_ += " else";
        with(s.children[2], 2, [&] { control_body(s.children[2], depth); });
      }
      break;
    }
    default:
      fail(std::string(kind_name(s.kind)) + " is not a statement");
    }
  }

  void control_body(const Node &b, int depth) {
    if (b.kind != NodeKind::Block)
      fail("control-flow body must be a block");
    braced_block(b, depth, true);
  }

  std::string clause(const Node &c) {
    if (c.kind == NodeKind::Declaration)
      return declaration(c);
    if (c.kind == NodeKind::Assignment)
      return assignment(c);
    if (is_expression(c.kind))
      return expression(c);
    fail(std::string(kind_name(c.kind)) + " is not allowed in a for clause");
  }

  std::string condition(const Node &c) {
    if (!is_expression(c.kind))
      fail("loop condition must be an expression");
    return expression(c);
  }

  std::string declaration(const Node &d) {
    expect_name(d);
    expect_type(d);
    expect_children(d, 0, 1);
    auto s = d.type->declare(d.text);
    if (!d.children.empty())
      with(d.children[0], 0, [&] { s += " = " + expression(d.children[0]); });
    return s;
  }

  std::string assignment(const Node &a) {
    expect_children(a, 2, 2);
    if (a.text.empty() || a.text.back() != '=')
      fail("invalid assignment operator '" + a.text + "'");
    const auto &lhs = a.children[0];
    std::string s;
    with(lhs, 0, [&] {
      if (lhs.kind != NodeKind::Identifier && lhs.kind != NodeKind::Index &&
          lhs.kind != NodeKind::Raw)
        fail("assignment target must be an identifier or index");
      s = expression(lhs);
    });
    with(a.children[1], 1, [&] { s += " " + a.text + " " + expression(a.children[1]); });
    return s;
  }

  std::string expression(const Node &e) {
    switch (e.kind) {
    case NodeKind::Identifier:
    case NodeKind::Literal:
      if (!e.children.empty())
        fail("leaf node has children");
      if (e.text.empty())
        fail("empty " + std::string(kind_name(e.kind)));
      return e.text;
    case NodeKind::Raw: return e.text;
    case NodeKind::Index: {
      expect_children(e, 2, 2);
      std::string s;
      with(e.children[0], 0, [&] { s = operand(e.children[0], 100, false); });
      with(e.children[1], 1, [&] { s += "[" + expression(e.children[1]) + "]"; });
      return s;
    }
    case NodeKind::Call: {
      expect_name(e);
      std::string s = e.text + "(";
      for (std::size_t k = 0; k < e.children.size(); ++k)
        with(e.children[k], k, [&] {
          if (k > 0)
            s += ", ";
          s += expression(e.children[k]);
        });
      return s + ")";
    }
    case NodeKind::BinaryOp: {
      expect_children(e, 2, 2);
      const int prec = precedence(e.text);
      if (prec < 0)
        fail("unknown binary operator '" + e.text + "'");
      std::string s;
      with(e.children[0], 0, [&] { s = operand(e.children[0], prec, false); });
      s += " " + e.text + " ";
      with(e.children[1], 1, [&] { s += operand(e.children[1], prec, true); });
      return s;
    }
    default:
      fail(std::string(kind_name(e.kind)) + " is not an expression");
    }
  }

  // Parenthesizes a binary-op operand that binds looser than its parent (or
  // equally tight on the right, since C binary operators are left-assoc).
  std::string operand(const Node &e, int parent_prec, bool right) {
    auto s = expression(e);
    if (e.kind == NodeKind::BinaryOp) {
      const int p = precedence(e.text);
      if (p < parent_prec || (right && p == parent_prec))
        return "(" + s + ")";
    } else if (e.kind == NodeKind::Raw && parent_prec >= 0) {
      return "(" + s + ")";
    }
    return s;
  }

  void raw_lines(int depth, std::string_view text) {
    std::size_t pos = 0;
    while (pos <= text.size()) {
      auto nl = text.find('\n', pos);
      if (nl == std::string_view::npos)
        nl = text.size();
      const auto piece = text.substr(pos, nl - pos);
      if (!(piece.empty() && nl == text.size() && pos > 0))
        line(piece.empty() ? 0 : depth, piece);
      pos = nl + 1;
    }
  }

  void indent(int depth) { out_.append(static_cast<std::size_t>(depth) * 4, ' '); }

  void line(int depth, std::string_view s) {
    indent(depth);
    out_ += s;
    out_ += '\n';
  }

  std::string out_;
  std::vector<std::string> path_;
};

} // namespace detail

/// Renders a tree to C source text. Throws IllFormedTree naming the path of
/// the offending node (e.g. `translation-unit[0]/function-def[0]/block[3]`).
inline std::string emit(const Node &root) { return detail::Emitter().run(root); }

} // namespace rtcg::csyntax

#endif // RTCG_CSYNTAX_AST_HPP
