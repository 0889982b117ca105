// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 dacsfl contributors

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "dacsfl/expr.hpp"

namespace dacsfl {

// Line-oriented sectioned text: "[name]" headers, "#" comments.
struct TextLine {
  int number = 0;
  std::string text;
};

struct TextSection {
  std::string name;
  int line = 0;
  std::vector<TextLine> lines;
};

class SectionedText {
 public:
  SectionedText(std::string_view text, std::string source);

  const std::string& source() const { return source_; }
  const TextSection* find(const std::string& name) const;
  const TextSection& require(const std::string& name) const;
  const std::vector<TextSection>& sections() const { return sections_; }

  [[noreturn]] void fail(ErrorCode code, int line, const std::string& message) const;

  // Whitespace-separated identifiers of a section.
  std::vector<std::string> names(const TextSection& s) const;
  // key=value pairs of a section.
  std::vector<std::pair<std::string, std::string>> assignments(const TextSection& s) const;
  // One expression per comma-separated cell of every line.
  std::vector<std::vector<Expr>> rows(const TextSection& s, const std::set<std::string>& known) const;
  Expr expression(const std::string& text, int line, const std::set<std::string>& known) const;

 private:
  std::string source_;
  std::vector<TextSection> sections_;
};

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);
bool is_identifier(const std::string& s);

}  // namespace dacsfl
