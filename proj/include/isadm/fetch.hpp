#pragma once

#include <cstddef>
#include <filesystem>
#include <string>

namespace isadm {

/// True when ISADM_OFFLINE=1 is set; all network use must then be refused.
bool offline_mode();

/// Downloads a raw dataset bundle and writes the body verbatim to the
/// destination. No parsing is performed. Returns the byte count written.
/// Throws ConfigError in offline mode, IoError on network or write failure.
std::size_t fetch_dataset(const std::string& url,
                          const std::filesystem::path& destination);

} // namespace isadm
