#include "rtlforge/process.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <cstdlib>
#include <cstring>

#include "rtlforge/error.hpp"
#include "rtlforge/text.hpp"

namespace rtlforge {

namespace {

struct Pipe {
    int fds[2] = {-1, -1};
    Pipe() {
        if (::pipe2(fds, O_CLOEXEC) != 0) throw Error(ErrorCode::kToolError, "pipe failed");
    }
    ~Pipe() {
        for (int fd : fds)
            if (fd >= 0) ::close(fd);
    }
    void close_end(int i) {
        if (fds[i] >= 0) ::close(fds[i]);
        fds[i] = -1;
    }
};

}  // namespace

ProcessResult run_shell(const std::string& command, const std::filesystem::path& workdir,
                        std::chrono::duration<double> timeout) {
    Pipe out_pipe;
    Pipe err_pipe;
    const std::string dir = workdir.string();

    pid_t pid = ::fork();
    if (pid < 0) throw Error(ErrorCode::kToolError, std::string("fork failed: ") + std::strerror(errno));
    if (pid == 0) {
        ::setpgid(0, 0);
        ::dup2(out_pipe.fds[1], STDOUT_FILENO);
        ::dup2(err_pipe.fds[1], STDERR_FILENO);
        int devnull = ::open("/dev/null", O_RDONLY);
        if (devnull >= 0) ::dup2(devnull, STDIN_FILENO);
        if (!dir.empty() && ::chdir(dir.c_str()) != 0) _exit(126);
        ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    ::setpgid(pid, pid);
    out_pipe.close_end(1);
    err_pipe.close_end(1);

    ProcessResult result;
    const auto deadline = std::chrono::steady_clock::now() +
                          std::chrono::duration_cast<std::chrono::steady_clock::duration>(timeout);
    std::array<pollfd, 2> polls{pollfd{out_pipe.fds[0], POLLIN, 0}, pollfd{err_pipe.fds[0], POLLIN, 0}};
    int open_streams = 2;
    std::array<char, 8192> buf{};

    while (open_streams > 0) {
        auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0) {
            result.timed_out = true;
            break;
        }
        int rc = ::poll(polls.data(), polls.size(), static_cast<int>(std::min<long long>(left.count(), 1000)));
        if (rc < 0) {
            if (errno == EINTR) continue;
            break;
        }
        for (size_t i = 0; i < polls.size(); ++i) {
            if (polls[i].fd < 0 || !(polls[i].revents & (POLLIN | POLLHUP | POLLERR))) continue;
            ssize_t n = ::read(polls[i].fd, buf.data(), buf.size());
            if (n > 0) {
                (i == 0 ? result.stdout_text : result.stderr_text).append(buf.data(), static_cast<size_t>(n));
            } else if (n == 0 || errno != EINTR) {
                polls[i].fd = -1;
                --open_streams;
            }
        }
    }

    if (result.timed_out) ::kill(-pid, SIGKILL);
    int status = 0;
    while (true) {
        if (!result.timed_out) {
            // Streams closed; give the child the remaining budget to exit.
            pid_t w = ::waitpid(pid, &status, WNOHANG);
            if (w == pid) break;
            if (std::chrono::steady_clock::now() >= deadline) {
                result.timed_out = true;
                ::kill(-pid, SIGKILL);
                continue;
            }
            ::usleep(2000);
            continue;
        }
        if (::waitpid(pid, &status, 0) == pid || errno != EINTR) break;
    }
    if (!result.timed_out && WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
    return result;
}

std::string shell_quote(const std::string& arg) {
    std::string out = "'";
    for (char c : arg) {
        if (c == '\'') out += "'\\''";
        else out.push_back(c);
    }
    out.push_back('\'');
    return out;
}

bool program_on_path(const std::string& program) {
    if (program.empty()) return false;
    if (program.find('/') != std::string::npos) return ::access(program.c_str(), X_OK) == 0;
    const char* path = std::getenv("PATH");
    if (!path) return false;
    for (const auto& dir : text::split(path, ':')) {
        if (dir.empty()) continue;
        std::string candidate = dir + "/" + program;
        if (::access(candidate.c_str(), X_OK) == 0) return true;
    }
    return false;
}

}  // namespace rtlforge
