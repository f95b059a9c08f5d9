// Copyright 2026 The Auralab Authors.
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

#ifndef AURALAB_CLI_HPP_
#define AURALAB_CLI_HPP_

namespace auralab {

// Exit statuses: 0 success, 1 runtime failure, 2 configuration error.
int cli_main(int argc, const char* const* argv);

}  // namespace auralab

#endif  // AURALAB_CLI_HPP_
