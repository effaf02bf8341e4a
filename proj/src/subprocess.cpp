#include "aviator/subprocess.hpp"

#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstring>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include "aviator/errors.hpp"

namespace aviator {

namespace {

void close_fd(int& fd) {
    if (fd >= 0) {
        ::close(fd);
        fd = -1;
    }
}

}  // namespace

SubprocessResult run_subprocess(const std::vector<std::string>& argv,
                                std::optional<double> timeout_seconds) {
    if (argv.empty()) throw DomainError("run_subprocess needs a command");

    int out_pipe[2] = {-1, -1};
    int err_pipe[2] = {-1, -1};
    int exec_pipe[2] = {-1, -1};  // reports execvp failure back to the parent
    if (::pipe(out_pipe) != 0 || ::pipe(err_pipe) != 0 || ::pipe(exec_pipe) != 0) {
        throw Error("pipe() failed: " + std::string(std::strerror(errno)));
    }
    ::fcntl(exec_pipe[1], F_SETFD, FD_CLOEXEC);

    pid_t pid = ::fork();
    if (pid < 0) {
        throw Error("fork() failed: " + std::string(std::strerror(errno)));
    }
    if (pid == 0) {
        ::dup2(out_pipe[1], STDOUT_FILENO);
        ::dup2(err_pipe[1], STDERR_FILENO);
        ::close(out_pipe[0]);
        ::close(out_pipe[1]);
        ::close(err_pipe[0]);
        ::close(err_pipe[1]);
        ::close(exec_pipe[0]);
        std::vector<char*> args;
        args.reserve(argv.size() + 1);
        for (const std::string& a : argv) args.push_back(const_cast<char*>(a.c_str()));
        args.push_back(nullptr);
        ::execvp(args[0], args.data());
        int err = errno;
        ssize_t ignored = ::write(exec_pipe[1], &err, sizeof err);
        (void)ignored;
        ::_exit(127);
    }

    close_fd(out_pipe[1]);
    close_fd(err_pipe[1]);
    close_fd(exec_pipe[1]);

    // did exec succeed?
    int exec_errno = 0;
    ssize_t n = ::read(exec_pipe[0], &exec_errno, sizeof exec_errno);
    close_fd(exec_pipe[0]);
    if (n > 0) {
        ::waitpid(pid, nullptr, 0);
        close_fd(out_pipe[0]);
        close_fd(err_pipe[0]);
        throw ToolMissing("cannot run '" + argv[0] + "': " + std::strerror(exec_errno));
    }

    SubprocessResult result;
    auto deadline = std::chrono::steady_clock::now() +
                    std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                        std::chrono::duration<double>(timeout_seconds.value_or(0.0)));

    struct pollfd fds[2];
    fds[0] = {out_pipe[0], POLLIN, 0};
    fds[1] = {err_pipe[0], POLLIN, 0};
    bool open_out = true, open_err = true;
    char buf[4096];
    while (open_out || open_err) {
        int wait_ms = -1;
        if (timeout_seconds) {
            auto remain = std::chrono::duration_cast<std::chrono::milliseconds>(
                              deadline - std::chrono::steady_clock::now())
                              .count();
            if (remain <= 0) {
                ::kill(pid, SIGKILL);
                result.timed_out = true;
                break;
            }
            wait_ms = static_cast<int>(remain);
        }
        fds[0].fd = open_out ? out_pipe[0] : -1;
        fds[1].fd = open_err ? err_pipe[0] : -1;
        int rc = ::poll(fds, 2, wait_ms);
        if (rc < 0) {
            if (errno == EINTR) continue;
            break;
        }
        if (rc == 0) continue;  // loop re-checks the deadline
        for (int i = 0; i < 2; ++i) {
            if (fds[i].fd < 0 || !(fds[i].revents & (POLLIN | POLLHUP))) continue;
            ssize_t got = ::read(fds[i].fd, buf, sizeof buf);
            if (got > 0) {
                (i == 0 ? result.stdout_text : result.stderr_text)
                    .append(buf, static_cast<std::size_t>(got));
            } else {
                if (i == 0) open_out = false;
                else open_err = false;
            }
        }
    }
    close_fd(out_pipe[0]);
    close_fd(err_pipe[0]);

    int status = 0;
    ::waitpid(pid, &status, 0);
    if (WIFEXITED(status)) {
        result.exit_code = WEXITSTATUS(status);
    } else if (WIFSIGNALED(status)) {
        result.exit_code = -WTERMSIG(status);
    }
    return result;
}

bool command_available(const std::string& exe) {
    try {
        SubprocessResult r = run_subprocess({exe, "--version"}, 20.0);
        return !r.timed_out && r.exit_code == 0;
    } catch (const ToolMissing&) {
        return false;
    }
}

}  // namespace aviator
