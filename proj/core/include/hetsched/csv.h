// Copyright 2026 The hetsched Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef HETSCHED_CSV_H_
#define HETSCHED_CSV_H_

#include <string>
#include <string_view>
#include <vector>

// Minimal RFC 4180 reading and writing. Lines starting with '#' before the
// header are comments.
namespace hetsched::csv {

// %.17g, so parse_double(format_double(x)) == x for every finite x.
std::string format_double(double value);
double parse_double(std::string_view text);
long long parse_int(std::string_view text);

// Quotes a field when it contains a comma, quote or line break.
std::string escape(std::string_view field);
std::string join(const std::vector<std::string>& fields);
std::vector<std::string> split_line(std::string_view line);

struct Table {
  std::vector<std::string> comments;  // without the leading "# "
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Throws ConfigError when the column is missing.
  std::size_t column(std::string_view name) const;
};

// Throws ConfigError on a row whose width differs from the header.
Table parse(std::string_view text);
std::string format(const Table& table);

}  // namespace hetsched::csv

#endif  // HETSCHED_CSV_H_
