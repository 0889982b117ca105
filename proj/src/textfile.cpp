// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 dacsfl contributors

#include "dacsfl/textfile.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace dacsfl {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(trim(cur));
  return out;
}

}  // namespace

bool is_identifier(const std::string& s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  return true;
}

SectionedText::SectionedText(std::string_view text, std::string source) : source_(std::move(source)) {
  std::istringstream in{std::string(text)};
  std::string raw;
  int number = 0;
  while (std::getline(in, raw)) {
    ++number;
    auto hash = raw.find('#');
    std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    for (char c : line) {
      if (static_cast<unsigned char>(c) > 127) fail(ErrorCode::Parse, number, "non-ASCII character");
    }
    if (line.front() == '[') {
      if (line.back() != ']') fail(ErrorCode::Parse, number, "malformed section header");
      std::string name = trim(line.substr(1, line.size() - 2));
      if (find(name)) fail(ErrorCode::Schema, number, "duplicate section [" + name + "]");
      sections_.push_back({name, number, {}});
      continue;
    }
    if (sections_.empty()) fail(ErrorCode::Schema, number, "content before the first section header");
    sections_.back().lines.push_back({number, line});
  }
}

const TextSection* SectionedText::find(const std::string& name) const {
  for (const auto& s : sections_)
    if (s.name == name) return &s;
  return nullptr;
}

const TextSection& SectionedText::require(const std::string& name) const {
  const TextSection* s = find(name);
  if (!s) fail(ErrorCode::Schema, 0, "missing section [" + name + "]");
  return *s;
}

void SectionedText::fail(ErrorCode code, int line, const std::string& message) const {
  std::string where = source_;
  if (line > 0) where += ":" + std::to_string(line);
  throw Error(code, where + ": " + message);
}

std::vector<std::string> SectionedText::names(const TextSection& s) const {
  std::vector<std::string> out;
  for (const auto& l : s.lines) {
    std::istringstream in(l.text);
    std::string tok;
    while (in >> tok) {
      if (!is_identifier(tok)) fail(ErrorCode::Schema, l.number, "invalid name '" + tok + "'");
      out.push_back(tok);
    }
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> SectionedText::assignments(const TextSection& s) const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& l : s.lines) {
    std::istringstream in(l.text);
    std::string tok;
    while (in >> tok) {
      auto eq = tok.find('=');
      if (eq == std::string::npos || eq == 0 || eq + 1 == tok.size()) {
        fail(ErrorCode::Schema, l.number, "expected key=value, got '" + tok + "'");
      }
      out.emplace_back(tok.substr(0, eq), tok.substr(eq + 1));
    }
  }
  return out;
}

Expr SectionedText::expression(const std::string& text, int line, const std::set<std::string>& known) const {
  try {
    return parse_expr(text, &known);
  } catch (const ParseError& e) {
    fail(e.code(), line, std::string(e.what()) + " in '" + text + "'");
  }
}

std::vector<std::vector<Expr>> SectionedText::rows(const TextSection& s, const std::set<std::string>& known) const {
  std::vector<std::vector<Expr>> out;
  for (const auto& l : s.lines) {
    std::vector<Expr> row;
    for (const auto& cell : split(l.text, ',')) {
      if (cell.empty()) fail(ErrorCode::Parse, l.number, "empty matrix entry");
      row.push_back(expression(cell, l.number, known));
    }
    out.push_back(std::move(row));
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
  out << content;
  if (!out) throw Error(ErrorCode::Io, "write failed for '" + path + "'");
}

}  // namespace dacsfl
