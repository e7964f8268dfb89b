#ifndef VCM_HASH_H_
#define VCM_HASH_H_

#include <string>
#include <string_view>

namespace vcm {

// Lowercase hex SHA-256 of `data`.
std::string Sha256Hex(std::string_view data);

}  // namespace vcm

#endif  // VCM_HASH_H_
