#pragma once

#include <string>

#include <httplib.h>

#include "mspsc/error.hpp"
#include "mspsc/service.hpp"

namespace mspsc {

struct HttpOptions {
  std::string auth_token;  // empty disables the bearer check
};

// Installs the /v1 routes. `service` must outlive `server`.
void register_routes(httplib::Server& server, Service& service, const HttpOptions& options);

// Status code used for an Error of the given kind.
int http_status(Errc code) noexcept;

}  // namespace mspsc
