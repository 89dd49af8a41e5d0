#include "qtmrl/hash.hpp"

#include <fstream>
#include <sstream>

#include "qtmrl/core.hpp"

namespace qtmrl {

std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

std::string file_fingerprint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("missing-file", "cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return hex64(fnv1a64(buf.str()));
}

}  // namespace qtmrl
