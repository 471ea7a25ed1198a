#pragma once

// Minimal OpenCL 1.2 host API surface, resolved at runtime from the ICD loader so the library
// builds and runs (CPU-only) on machines without OpenCL headers or drivers.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>

namespace mridvr::gpu::cl {

using cl_int = std::int32_t;
using cl_uint = std::uint32_t;
using cl_ulong = std::uint64_t;
using cl_bool = cl_uint;
using cl_bitfield = cl_ulong;
using cl_device_type = cl_bitfield;
using cl_mem_flags = cl_bitfield;
using cl_command_queue_properties = cl_bitfield;
using cl_platform_info = cl_uint;
using cl_device_info = cl_uint;
using cl_program_build_info = cl_uint;
using cl_kernel_work_group_info = cl_uint;
using cl_context_properties = std::intptr_t;

using cl_platform_id = struct _cl_platform_id*;
using cl_device_id = struct _cl_device_id*;
using cl_context = struct _cl_context*;
using cl_command_queue = struct _cl_command_queue*;
using cl_mem = struct _cl_mem*;
using cl_program = struct _cl_program*;
using cl_kernel = struct _cl_kernel*;
using cl_event = struct _cl_event*;

constexpr cl_int CL_SUCCESS = 0;
constexpr cl_int CL_DEVICE_NOT_FOUND = -1;
constexpr cl_int CL_BUILD_PROGRAM_FAILURE = -11;
constexpr cl_int CL_PLATFORM_NOT_FOUND_KHR = -1001;
constexpr cl_bool CL_TRUE = 1;

constexpr cl_device_type CL_DEVICE_TYPE_CPU = 1 << 1;
constexpr cl_device_type CL_DEVICE_TYPE_GPU = 1 << 2;
constexpr cl_device_type CL_DEVICE_TYPE_ACCELERATOR = 1 << 3;
constexpr cl_device_type CL_DEVICE_TYPE_ALL = 0xFFFFFFFF;

constexpr cl_platform_info CL_PLATFORM_VERSION = 0x0901;
constexpr cl_platform_info CL_PLATFORM_NAME = 0x0902;

constexpr cl_device_info CL_DEVICE_TYPE = 0x1000;
constexpr cl_device_info CL_DEVICE_MAX_WORK_GROUP_SIZE = 0x1004;
constexpr cl_device_info CL_DEVICE_MAX_MEM_ALLOC_SIZE = 0x1010;
constexpr cl_device_info CL_DEVICE_IMAGE3D_MAX_WIDTH = 0x1013;
constexpr cl_device_info CL_DEVICE_IMAGE3D_MAX_HEIGHT = 0x1014;
constexpr cl_device_info CL_DEVICE_IMAGE3D_MAX_DEPTH = 0x1015;
constexpr cl_device_info CL_DEVICE_IMAGE_SUPPORT = 0x1016;
constexpr cl_device_info CL_DEVICE_SINGLE_FP_CONFIG = 0x101B;
constexpr cl_device_info CL_DEVICE_LOCAL_MEM_SIZE = 0x1023;
constexpr cl_device_info CL_DEVICE_NAME = 0x102B;
constexpr cl_device_info CL_DEVICE_VENDOR = 0x102C;
constexpr cl_device_info CL_DEVICE_VERSION = 0x102F;
constexpr cl_device_info CL_DEVICE_HOST_UNIFIED_MEMORY = 0x1035;

constexpr cl_bitfield CL_FP_CORRECTLY_ROUNDED_DIVIDE_SQRT = 1 << 7;

constexpr cl_context_properties CL_CONTEXT_PLATFORM = 0x1084;
constexpr cl_program_build_info CL_PROGRAM_BUILD_LOG = 0x1183;
constexpr cl_kernel_work_group_info CL_KERNEL_WORK_GROUP_SIZE = 0x11B0;

constexpr cl_mem_flags CL_MEM_READ_WRITE = 1 << 0;
constexpr cl_mem_flags CL_MEM_READ_ONLY = 1 << 2;
constexpr cl_mem_flags CL_MEM_COPY_HOST_PTR = 1 << 5;

#if defined(_WIN32)
#define MRIDVR_CL_CALL __stdcall
#else
#define MRIDVR_CL_CALL
#endif

struct Api {
    cl_int(MRIDVR_CL_CALL* GetPlatformIDs)(cl_uint, cl_platform_id*, cl_uint*);
    cl_int(MRIDVR_CL_CALL* GetPlatformInfo)(cl_platform_id, cl_platform_info, std::size_t, void*, std::size_t*);
    cl_int(MRIDVR_CL_CALL* GetDeviceIDs)(cl_platform_id, cl_device_type, cl_uint, cl_device_id*, cl_uint*);
    cl_int(MRIDVR_CL_CALL* GetDeviceInfo)(cl_device_id, cl_device_info, std::size_t, void*, std::size_t*);
    cl_context(MRIDVR_CL_CALL* CreateContext)(const cl_context_properties*, cl_uint, const cl_device_id*,
                                              void(MRIDVR_CL_CALL*)(const char*, const void*, std::size_t, void*),
                                              void*, cl_int*);
    cl_command_queue(MRIDVR_CL_CALL* CreateCommandQueue)(cl_context, cl_device_id, cl_command_queue_properties,
                                                         cl_int*);
    cl_program(MRIDVR_CL_CALL* CreateProgramWithSource)(cl_context, cl_uint, const char**, const std::size_t*,
                                                        cl_int*);
    cl_int(MRIDVR_CL_CALL* BuildProgram)(cl_program, cl_uint, const cl_device_id*, const char*,
                                         void(MRIDVR_CL_CALL*)(cl_program, void*), void*);
    cl_int(MRIDVR_CL_CALL* GetProgramBuildInfo)(cl_program, cl_device_id, cl_program_build_info, std::size_t, void*,
                                                std::size_t*);
    cl_kernel(MRIDVR_CL_CALL* CreateKernel)(cl_program, const char*, cl_int*);
    cl_int(MRIDVR_CL_CALL* GetKernelWorkGroupInfo)(cl_kernel, cl_device_id, cl_kernel_work_group_info, std::size_t,
                                                   void*, std::size_t*);
    cl_int(MRIDVR_CL_CALL* SetKernelArg)(cl_kernel, cl_uint, std::size_t, const void*);
    cl_mem(MRIDVR_CL_CALL* CreateBuffer)(cl_context, cl_mem_flags, std::size_t, void*, cl_int*);
    cl_int(MRIDVR_CL_CALL* EnqueueWriteBuffer)(cl_command_queue, cl_mem, cl_bool, std::size_t, std::size_t,
                                               const void*, cl_uint, const cl_event*, cl_event*);
    cl_int(MRIDVR_CL_CALL* EnqueueReadBuffer)(cl_command_queue, cl_mem, cl_bool, std::size_t, std::size_t, void*,
                                              cl_uint, const cl_event*, cl_event*);
    cl_int(MRIDVR_CL_CALL* EnqueueNDRangeKernel)(cl_command_queue, cl_kernel, cl_uint, const std::size_t*,
                                                 const std::size_t*, const std::size_t*, cl_uint, const cl_event*,
                                                 cl_event*);
    cl_int(MRIDVR_CL_CALL* Finish)(cl_command_queue);
    cl_int(MRIDVR_CL_CALL* ReleaseMemObject)(cl_mem);
    cl_int(MRIDVR_CL_CALL* ReleaseKernel)(cl_kernel);
    cl_int(MRIDVR_CL_CALL* ReleaseProgram)(cl_program);
    cl_int(MRIDVR_CL_CALL* ReleaseCommandQueue)(cl_command_queue);
    cl_int(MRIDVR_CL_CALL* ReleaseContext)(cl_context);
};

// Loads the ICD loader (MRIDVR_OPENCL_LIBRARY overrides the library name). Returns null with a
// reason when the library or any entry point is missing.
std::shared_ptr<const Api> load_api(std::string& reason);

std::string error_name(cl_int code);

} // namespace mridvr::gpu::cl
