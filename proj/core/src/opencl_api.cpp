#include "opencl_api.hpp"

#include <dlfcn.h>

#include <cstdlib>
#include <mutex>

namespace mridvr::gpu::cl {

namespace {

struct Library {
    void* handle = nullptr;
    Api api{};
};

template <typename Fn>
bool resolve(void* handle, const char* name, Fn& slot, std::string& reason) {
    void* sym = dlsym(handle, name);
    if (sym == nullptr) {
        reason = std::string("OpenCL entry point missing: ") + name;
        return false;
    }
    slot = reinterpret_cast<Fn>(sym);
    return true;
}

} // namespace

std::shared_ptr<const Api> load_api(std::string& reason) {
    // The loader stays resident for the process lifetime; ICDs do not support unloading well.
    static std::mutex mutex;
    static std::shared_ptr<Library> cached;
    std::lock_guard lock(mutex);
    if (cached) return {cached, &cached->api};

    const char* override_name = std::getenv("MRIDVR_OPENCL_LIBRARY");
    void* handle = nullptr;
    if (override_name != nullptr && *override_name != '\0') {
        handle = dlopen(override_name, RTLD_NOW | RTLD_LOCAL);
    } else {
        for (const char* name : {"libOpenCL.so.1", "libOpenCL.so"}) {
            handle = dlopen(name, RTLD_NOW | RTLD_LOCAL);
            if (handle != nullptr) break;
        }
    }
    if (handle == nullptr) {
        reason = "no OpenCL ICD loader found";
        return nullptr;
    }

    auto lib = std::make_shared<Library>();
    lib->handle = handle;
    Api& a = lib->api;
    const bool ok = resolve(handle, "clGetPlatformIDs", a.GetPlatformIDs, reason) &&
                    resolve(handle, "clGetPlatformInfo", a.GetPlatformInfo, reason) &&
                    resolve(handle, "clGetDeviceIDs", a.GetDeviceIDs, reason) &&
                    resolve(handle, "clGetDeviceInfo", a.GetDeviceInfo, reason) &&
                    resolve(handle, "clCreateContext", a.CreateContext, reason) &&
                    resolve(handle, "clCreateCommandQueue", a.CreateCommandQueue, reason) &&
                    resolve(handle, "clCreateProgramWithSource", a.CreateProgramWithSource, reason) &&
                    resolve(handle, "clBuildProgram", a.BuildProgram, reason) &&
                    resolve(handle, "clGetProgramBuildInfo", a.GetProgramBuildInfo, reason) &&
                    resolve(handle, "clCreateKernel", a.CreateKernel, reason) &&
                    resolve(handle, "clGetKernelWorkGroupInfo", a.GetKernelWorkGroupInfo, reason) &&
                    resolve(handle, "clSetKernelArg", a.SetKernelArg, reason) &&
                    resolve(handle, "clCreateBuffer", a.CreateBuffer, reason) &&
                    resolve(handle, "clEnqueueWriteBuffer", a.EnqueueWriteBuffer, reason) &&
                    resolve(handle, "clEnqueueReadBuffer", a.EnqueueReadBuffer, reason) &&
                    resolve(handle, "clEnqueueNDRangeKernel", a.EnqueueNDRangeKernel, reason) &&
                    resolve(handle, "clFinish", a.Finish, reason) &&
                    resolve(handle, "clReleaseMemObject", a.ReleaseMemObject, reason) &&
                    resolve(handle, "clReleaseKernel", a.ReleaseKernel, reason) &&
                    resolve(handle, "clReleaseProgram", a.ReleaseProgram, reason) &&
                    resolve(handle, "clReleaseCommandQueue", a.ReleaseCommandQueue, reason) &&
                    resolve(handle, "clReleaseContext", a.ReleaseContext, reason);
    if (!ok) {
        dlclose(handle);
        return nullptr;
    }
    cached = lib;
    return {cached, &cached->api};
}

std::string error_name(cl_int code) {
    switch (code) {
        case 0: return "CL_SUCCESS";
        case -1: return "CL_DEVICE_NOT_FOUND";
        case -2: return "CL_DEVICE_NOT_AVAILABLE";
        case -3: return "CL_COMPILER_NOT_AVAILABLE";
        case -4: return "CL_MEM_OBJECT_ALLOCATION_FAILURE";
        case -5: return "CL_OUT_OF_RESOURCES";
        case -6: return "CL_OUT_OF_HOST_MEMORY";
        case -11: return "CL_BUILD_PROGRAM_FAILURE";
        case -30: return "CL_INVALID_VALUE";
        case -36: return "CL_INVALID_COMMAND_QUEUE";
        case -38: return "CL_INVALID_MEM_OBJECT";
        case -48: return "CL_INVALID_KERNEL";
        case -51: return "CL_INVALID_ARG_SIZE";
        case -52: return "CL_INVALID_KERNEL_ARGS";
        case -54: return "CL_INVALID_WORK_GROUP_SIZE";
        case -61: return "CL_INVALID_BUFFER_SIZE";
        case -1001: return "CL_PLATFORM_NOT_FOUND_KHR";
        default: return "CL error " + std::to_string(code);
    }
}

} // namespace mridvr::gpu::cl
