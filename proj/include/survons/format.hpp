// Copyright 2026 The SurvONS Authors.
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

#ifndef SURVONS_FORMAT_HPP
#define SURVONS_FORMAT_HPP

#include <string>
#include <string_view>
#include <vector>

namespace survons {

/// 17 significant digits; round-trips every finite double. Non-finite values
/// print as nan / inf / -inf.
std::string format_double(double value);

/// Strict parse of a whole cell; accepts nan and inf. Throws InvalidArgument.
double parse_double(std::string_view text);

/// Comma split without quoting support (none of our files quote).
std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace survons

#endif  // SURVONS_FORMAT_HPP
