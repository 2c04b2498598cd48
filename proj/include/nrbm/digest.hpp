#ifndef NRBM_DIGEST_HPP
#define NRBM_DIGEST_HPP

#include <cstddef>
#include <string>

namespace nrbm {

std::string sha256_hex(const void* data, std::size_t size);
std::string sha256_hex(const std::string& data);
std::string sha256_file(const std::string& path);

}  // namespace nrbm

#endif  // NRBM_DIGEST_HPP
