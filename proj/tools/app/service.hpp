// Copyright Contributors to the avatar project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <memory>

#include "session.hpp"

namespace httplib {
class Server;
}

namespace avatar::app {

inline constexpr int kMaxServiceImageSide = 4096;
inline constexpr int kMaxTurntableViews = 360;

/// HTTP front end of a session: the /v1 JSON and image endpoints, plus the
/// static files under `ui_dir` mounted at /ui/ when that directory exists.
std::unique_ptr<httplib::Server> make_server(std::shared_ptr<AvatarSession> session,
                                             const std::filesystem::path& ui_dir);

/// Compiled-in location of the bundled viewer assets.
std::filesystem::path default_ui_dir();

}  // namespace avatar::app
