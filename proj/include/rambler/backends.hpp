#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "rambler/offline_backend.hpp"
#include "rambler/remote_backend.hpp"
#include "rambler/replay_backend.hpp"

namespace rambler {

/// offline | replay | remote. Replay is strict: a missing fixture fails.
inline std::shared_ptr<GistBackend> make_backend(const std::string& kind, const std::filesystem::path& fixtures = {}) {
    if (kind == "offline") return std::make_shared<OfflineBackend>();
    if (kind == "replay") return std::make_shared<ReplayBackend>(fixtures);
    if (kind == "remote") return std::make_shared<RemoteBackend>(RemoteConfig::from_env());
    fail(ErrorCode::BadRequest, "unknown backend '" + kind + "' (offline, replay or remote)");
}

}  // namespace rambler
