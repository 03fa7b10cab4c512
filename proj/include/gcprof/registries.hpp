/*
 * Copyright 2026 The gcprof Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef GCPROF_REGISTRIES_HPP
#define GCPROF_REGISTRIES_HPP

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "gcprof/common.hpp"
#include "gcprof/object.hpp"

namespace gcprof {

/// Dense interning table mapping type names to 16-bit ids. Id 0 is reserved
/// for "unknown" and pre-registered.
class TypeRegistry {
 public:
  TypeRegistry() { intern("unknown"); }

  TypeId intern(std::string_view name) {
    auto it = ids_.find(std::string(name));
    if (it != ids_.end()) return it->second;
    GCPROF_CHECK(names_.size() < 0x10000);
    TypeId id = static_cast<TypeId>(names_.size());
    names_.emplace_back(name);
    ids_.emplace(names_.back(), id);
    return id;
  }

  const std::string& name(TypeId id) const {
    return id < names_.size() ? names_[id] : names_[0];
  }
  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, TypeId> ids_;
};

/// Dense interning table for stack frame names; ids are stable for the life
/// of a profile.
class FrameRegistry {
 public:
  FrameId intern(std::string_view name) {
    auto it = ids_.find(std::string(name));
    if (it != ids_.end()) return it->second;
    FrameId id = static_cast<FrameId>(names_.size());
    names_.emplace_back(name);
    ids_.emplace(names_.back(), id);
    return id;
  }

  const std::string& name(FrameId id) const {
    static const std::string kMissing = "?";
    return id < names_.size() ? names_[id] : kMissing;
  }
  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, FrameId> ids_;
};

}  // namespace gcprof

#endif  // GCPROF_REGISTRIES_HPP
