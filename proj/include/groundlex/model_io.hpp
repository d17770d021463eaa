#pragma once

// Versioned JSON serialization of a JointModel.  Save -> load -> save is
// byte-identical; files with a different version are rejected.

#include <memory>
#include <string>

#include "groundlex/joint.hpp"

namespace groundlex {

void save_model(const JointModel& m, const std::string& path);
std::unique_ptr<JointModel> load_model(const std::string& path);

// Deep copy through the serialized representation (JointModel itself is
// non-copyable because of the form arena).
std::unique_ptr<JointModel> clone_model(const JointModel& m);

}  // namespace groundlex
