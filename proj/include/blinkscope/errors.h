/* Copyright 2026 The Blinkscope Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef BLINKSCOPE_ERRORS_H_
#define BLINKSCOPE_ERRORS_H_

#include <stdexcept>
#include <string>

namespace blinkscope {

// Malformed or invariant-violating input data. `path` locates the offending
// element, e.g. "$.videos[0].instances[2].blinks[1]" for JSON inputs.
class DataError : public std::runtime_error {
 public:
  DataError(std::string path, const std::string& what)
      : std::runtime_error(path.empty() ? what : path + ": " + what),
        path_(std::move(path)) {}

  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// An internal consistency check failed. Indicates a bug, not bad input.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace blinkscope

#endif  // BLINKSCOPE_ERRORS_H_
