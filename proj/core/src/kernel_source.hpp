#pragma once

#include <string_view>

namespace mridvr::gpu {

// common.cl, preprocess.cl and raymarch.cl concatenated at build time.
std::string_view embedded_kernel_source();

} // namespace mridvr::gpu
