#pragma once

#include "rambler/error.hpp"
#include "rambler/text.hpp"
#include "rambler/rake.hpp"
#include "rambler/keywords.hpp"
#include "rambler/zoom.hpp"
#include "rambler/summary_cache.hpp"
#include "rambler/document.hpp"
#include "rambler/prompts.hpp"
#include "rambler/backend.hpp"
#include "rambler/offline_backend.hpp"
#include "rambler/replay_backend.hpp"
#include "rambler/remote_backend.hpp"
#include "rambler/backends.hpp"
#include "rambler/gist_engine.hpp"
#include "rambler/summary_scheduler.hpp"
#include "rambler/stt.hpp"
#include "rambler/persistence.hpp"
#include "rambler/store.hpp"
#include "rambler/service.hpp"
#include "rambler/http_api.hpp"
