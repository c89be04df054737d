#pragma once

#include <mutex>

namespace kinklab::detail {

// the FFTW planner is not thread safe; every plan create/destroy goes through this
std::mutex& fftw_planner_lock();

}  // namespace kinklab::detail
