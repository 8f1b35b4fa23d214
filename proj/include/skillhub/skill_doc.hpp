#pragma once

#include <string>
#include <string_view>

namespace skillhub {

inline constexpr std::string_view kDefaultBaseUrl = "http://localhost:8742";

/// Renders the finding-skills SKILL.md handed to agents, with every endpoint
/// URL pointing at `server_base_url` (scheme://host[:port], optional trailing
/// slash). Throws InvalidArgument for anything else.
std::string emit_finding_skills_doc(std::string_view server_base_url = kDefaultBaseUrl);

/// Validates and canonicalizes a base URL (drops a trailing slash).
std::string normalize_base_url(std::string_view url);

}  // namespace skillhub
