// Copyright 2026 The rtcg-kit Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef RTCG_CSYNTAX_TEMPLATE_HPP
#define RTCG_CSYNTAX_TEMPLATE_HPP

// Two text-level generation strategies:
//
//  * substitute(): keyword replacement of `${name}` placeholders.
//  * render(): a small templating language on top of substitution with
//      {% for v in a..b %} ... {% endfor %}     (half-open integer range)
//      {% if cond %} ... {% else %} ... {% endif %}
//    where `cond` is `true`, `false`, or an optionally negated (`not x`)
//    variable bound to a bool or an integer (non-zero is true).
//
// Both are strict: every referenced name must be bound.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "rtcg/error.hpp"

namespace rtcg::csyntax {

using Bindings = std::map<std::string, std::string, std::less<>>;
using TemplateValue = std::variant<bool, std::int64_t, std::string>;
using TemplateContext = std::map<std::string, TemplateValue, std::less<>>;

namespace detail {

inline bool is_identifier(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_'))
    return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_'))
      return false;
  return true;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

// Returns the placeholder name starting at body[pos] == '$', body[pos+1] == '{'
// and advances pos past the closing brace.
inline std::string_view read_placeholder(std::string_view body, std::size_t &pos) {
  const auto close = body.find('}', pos + 2);
  if (close == std::string_view::npos)
    throw MalformedPlaceholder("unterminated '${' at offset " + std::to_string(pos));
  auto name = trim(body.substr(pos + 2, close - pos - 2));
  if (!is_identifier(name))
    throw MalformedPlaceholder("invalid placeholder name '" + std::string(name) +
                               "' at offset " + std::to_string(pos));
  pos = close + 1;
  return name;
}

} // namespace detail

/// Replaces every `${name}` in `body` with `bindings[name]`. Bytes outside
/// placeholders are copied unchanged; replacement text is not rescanned.
inline std::string substitute(std::string_view body, const Bindings &bindings) {
  std::string out;
  out.reserve(body.size());
  std::size_t pos = 0;
  while (pos < body.size()) {
    const auto next = body.find("${", pos);
    if (next == std::string_view::npos) {
      out.append(body.substr(pos));
      break;
    }
    out.append(body.substr(pos, next - pos));
    pos = next;
    const auto name = detail::read_placeholder(body, pos);
    const auto it = bindings.find(name);
    if (it == bindings.end())
      throw UnboundPlaceholder("unbound placeholder '" + std::string(name) + "'");
    out.append(it->second);
  }
  return out;
}

namespace detail {

struct TemplateNode;
using TemplateNodes = std::vector<TemplateNode>;

struct TextNode {
  std::string text;
};
struct VarNode {
  std::string name;
};
struct ForNode {
  std::string var;
  std::string lower, upper; // integer literal or variable name
  TemplateNodes body;
};
struct IfNode {
  std::string cond;
  bool negated = false;
  TemplateNodes then_body, else_body;
};
struct TemplateNode {
  std::variant<TextNode, VarNode, ForNode, IfNode> v;
};

class TemplateParser {
public:
  explicit TemplateParser(std::string_view body) : body_(body) {}

  TemplateNodes parse() {
    std::string closer;
    auto nodes = parse_until({}, closer);
    return nodes;
  }

private:
  // Parses nodes until one of `enders` is met as a tag keyword; the keyword
  // found is stored in `closer`. With no enders, parses to end of input.
  TemplateNodes parse_until(const std::vector<std::string_view> &enders,
                            std::string &closer) {
    TemplateNodes nodes;
    while (pos_ < body_.size()) {
      const auto dollar = body_.find("${", pos_);
      const auto tag = body_.find("{%", pos_);
      const auto next = std::min(dollar, tag);
      if (next == std::string_view::npos) {
        nodes.push_back({TextNode{std::string(body_.substr(pos_))}});
        pos_ = body_.size();
        break;
      }
      if (next > pos_)
        nodes.push_back({TextNode{std::string(body_.substr(pos_, next - pos_))}});
      pos_ = next;
      if (next == dollar) {
        nodes.push_back({VarNode{std::string(read_placeholder(body_, pos_))}});
        continue;
      }
      const auto tag_start = pos_;
      const auto close = body_.find("%}", pos_ + 2);
      if (close == std::string_view::npos)
        throw UnclosedBlock("unterminated '{%' at offset " + std::to_string(tag_start));
      const auto content = trim(body_.substr(pos_ + 2, close - pos_ - 2));
      pos_ = close + 2;
      const auto words = split_words(content);
      if (words.empty())
        throw TemplateSyntaxError("empty tag at offset " + std::to_string(tag_start));
      const auto &kw = words.front();
      for (auto e : enders) {
        if (kw == e) {
          if (words.size() != 1)
            throw TemplateSyntaxError("unexpected tokens after '" + std::string(kw) + "'");
          closer = std::string(kw);
          return nodes;
        }
      }
      if (kw == "for") {
        nodes.push_back({parse_for(words, tag_start)});
      } else if (kw == "if") {
        nodes.push_back({parse_if(words, tag_start)});
      } else {
        throw TemplateSyntaxError("unexpected tag '" + std::string(content) +
                                  "' at offset " + std::to_string(tag_start));
      }
    }
    if (!enders.empty())
      throw UnclosedBlock("missing '{% " + std::string(enders.front()) + " %}'");
    return nodes;
  }

  ForNode parse_for(const std::vector<std::string_view> &w, std::size_t at) {
    // for v in a..b
    if (w.size() != 4 || w[2] != "in" || !is_identifier(w[1]))
      throw TemplateSyntaxError("malformed for tag at offset " + std::to_string(at));
    const auto range = w[3];
    const auto dots = range.find("..");
    if (dots == std::string_view::npos)
      throw TemplateSyntaxError("for range must be 'a..b' at offset " + std::to_string(at));
    ForNode node;
    node.var = std::string(w[1]);
    node.lower = std::string(range.substr(0, dots));
    node.upper = std::string(range.substr(dots + 2));
    if (node.lower.empty() || node.upper.empty())
      throw TemplateSyntaxError("empty for bound at offset " + std::to_string(at));
    std::string closer;
    node.body = parse_until({"endfor"}, closer);
    return node;
  }

  IfNode parse_if(const std::vector<std::string_view> &w, std::size_t at) {
    IfNode node;
    if (w.size() == 2) {
      node.cond = std::string(w[1]);
    } else if (w.size() == 3 && w[1] == "not") {
      node.cond = std::string(w[2]);
      node.negated = true;
    } else {
      throw TemplateSyntaxError("malformed if tag at offset " + std::to_string(at));
    }
    std::string closer;
    node.then_body = parse_until({"endif", "else"}, closer);
    if (closer == "else")
      node.else_body = parse_until({"endif"}, closer);
    return node;
  }

  static std::vector<std::string_view> split_words(std::string_view s) {
    std::vector<std::string_view> words;
    std::size_t i = 0;
    while (i < s.size()) {
      while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i])))
        ++i;
      const auto start = i;
      while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i])))
        ++i;
      if (i > start)
        words.push_back(s.substr(start, i - start));
    }
    return words;
  }

  std::string_view body_;
  std::size_t pos_ = 0;
};

class TemplateRenderer {
public:
  explicit TemplateRenderer(const TemplateContext &ctx) : ctx_(ctx) {}

  void render(const TemplateNodes &nodes, std::string &out) {
    for (const auto &n : nodes)
      std::visit([&](const auto &node) { render_node(node, out); }, n.v);
  }

private:
  void render_node(const TextNode &n, std::string &out) { out += n.text; }

  void render_node(const VarNode &n, std::string &out) {
    const auto &value = lookup(n.name);
    if (const auto *s = std::get_if<std::string>(&value))
      out += *s;
    else if (const auto *i = std::get_if<std::int64_t>(&value))
      out += std::to_string(*i);
    else
      out += std::get<bool>(value) ? "1" : "0";
  }

  void render_node(const ForNode &n, std::string &out) {
    const auto lo = bound(n.lower);
    const auto hi = bound(n.upper);
    for (auto k = lo; k < hi; ++k) {
      locals_.emplace_back(n.var, TemplateValue{k});
      render(n.body, out);
      locals_.pop_back();
    }
  }

  void render_node(const IfNode &n, std::string &out) {
    bool truth = false;
    if (n.cond == "true") {
      truth = true;
    } else if (n.cond == "false") {
      truth = false;
    } else {
      const auto &value = lookup(n.cond);
      if (const auto *b = std::get_if<bool>(&value))
        truth = *b;
      else if (const auto *i = std::get_if<std::int64_t>(&value))
        truth = *i != 0;
      else
        throw TemplateSyntaxError("condition '" + n.cond + "' is not a bool or integer");
    }
    render(truth != n.negated ? n.then_body : n.else_body, out);
  }

  std::int64_t bound(const std::string &text) const {
    std::int64_t v = 0;
    const auto *first = text.data();
    const auto *last = text.data() + text.size();
    if (auto [p, ec] = std::from_chars(first, last, v); ec == std::errc() && p == last)
      return v;
    if (!is_identifier(text))
      throw NonIntegerBound("loop bound '" + text + "' is not an integer");
    const auto &value = lookup(text);
    if (const auto *i = std::get_if<std::int64_t>(&value))
      return *i;
    throw NonIntegerBound("loop bound '" + text + "' is not bound to an integer");
  }

  const TemplateValue &lookup(const std::string &name) const {
    for (auto it = locals_.rbegin(); it != locals_.rend(); ++it)
      if (it->first == name)
        return it->second;
    const auto it = ctx_.find(name);
    if (it == ctx_.end())
      throw UnboundVariable("unbound template variable '" + name + "'");
    return it->second;
  }

  const TemplateContext &ctx_;
  std::vector<std::pair<std::string, TemplateValue>> locals_;
};

} // namespace detail

/// Renders a template in the mini language described at the top of this file.
/// Loops over an empty range (a >= b) expand to nothing.
inline std::string render(std::string_view body, const TemplateContext &context) {
  const auto nodes = detail::TemplateParser(body).parse();
  std::string out;
  detail::TemplateRenderer(context).render(nodes, out);
  return out;
}

/// A template body; a thin value wrapper so call sites read as
/// `Template(body).render(ctx)`.
class Template {
public:
  Template() = default;
  explicit Template(std::string body) : body_(std::move(body)) {}

  const std::string &body() const noexcept { return body_; }
  std::string substitute(const Bindings &b) const { return csyntax::substitute(body_, b); }
  std::string render(const TemplateContext &c) const { return csyntax::render(body_, c); }

  friend bool operator==(const Template &, const Template &) = default;

private:
  std::string body_;
};

} // namespace rtcg::csyntax

#endif // RTCG_CSYNTAX_TEMPLATE_HPP
