// Copyright 2026 WSDT Authors
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

#pragma once

#include <sstream>
#include <stdexcept>
#include <string>

namespace wsdt {

/// Error taxonomy shared by the whole library. The C API maps Kind to a
/// status code; the CLI maps status codes to process exit codes.
class Error : public std::runtime_error {
public:
    enum class Kind {
        Dimension,  // shape/geometry violation
        Config,     // invalid configuration or schema violation
        Contract,   // precondition violation on an operation
        Io,         // file format / filesystem failure
        Numeric,    // non-finite values or numerical breakdown
    };

    Error(Kind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

struct DimensionError : Error {
    explicit DimensionError(const std::string& msg) : Error(Kind::Dimension, msg) {}
};
struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(Kind::Config, msg) {}
};
struct ContractError : Error {
    explicit ContractError(const std::string& msg) : Error(Kind::Contract, msg) {}
};
struct IoError : Error {
    explicit IoError(const std::string& msg) : Error(Kind::Io, msg) {}
};
struct NumericError : Error {
    explicit NumericError(const std::string& msg) : Error(Kind::Numeric, msg) {}
};

namespace detail {
inline void cat_into(std::ostringstream&) {}
template <typename Head, typename... Tail>
void cat_into(std::ostringstream& os, Head&& head, Tail&&... tail) {
    os << head;
    cat_into(os, std::forward<Tail>(tail)...);
}
}  // namespace detail

/// Build a message from mixed parts: cat("got ", h, "x", w).
template <typename... Args>
std::string cat(Args&&... args) {
    std::ostringstream os;
    detail::cat_into(os, std::forward<Args>(args)...);
    return os.str();
}

}  // namespace wsdt
