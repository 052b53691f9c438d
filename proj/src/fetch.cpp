#include "isadm/fetch.hpp"

#include "isadm/errors.hpp"
#include "json_support.hpp"

#ifdef ISADM_HAVE_OPENSSL
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

#include <cstdlib>
#include <string>

namespace isadm {

bool offline_mode() {
    const char* value = std::getenv("ISADM_OFFLINE");
    return value != nullptr && std::string(value) == "1";
}

std::size_t fetch_dataset(const std::string& url,
                          const std::filesystem::path& destination) {
    if (offline_mode()) {
        throw ConfigError("fetch refused: ISADM_OFFLINE=1 disables all network use");
    }

    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw ConfigError("malformed url \"" + url + "\" (expected http[s]://host[:port]/path)");
    }
    std::string scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") {
        throw ConfigError("unsupported url scheme \"" + scheme + "\"");
    }
#ifndef ISADM_HAVE_OPENSSL
    if (scheme == "https") {
        throw ConfigError("this build has no TLS support; use an http:// url");
    }
#endif
    std::string rest = url.substr(scheme_end + 3);
    auto slash = rest.find('/');
    std::string host = slash == std::string::npos ? rest : rest.substr(0, slash);
    std::string path = slash == std::string::npos ? std::string("/") : rest.substr(slash);
    if (host.empty()) {
        throw ConfigError("malformed url \"" + url + "\" (empty host)");
    }

    httplib::Client client(scheme + "://" + host);
    client.set_connection_timeout(10, 0);
    client.set_read_timeout(30, 0);
    client.set_follow_location(true);

    httplib::Result result = client.Get(path);
    if (!result) {
        throw IoError("network failure fetching " + url + ": " +
                      httplib::to_string(result.error()));
    }
    if (result->status < 200 || result->status >= 300) {
        throw IoError("fetching " + url + " returned HTTP status " +
                      std::to_string(result->status));
    }
    detail::write_file(destination, result->body);
    return result->body.size();
}

} // namespace isadm
