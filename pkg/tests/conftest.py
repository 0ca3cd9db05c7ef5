import os
import signal
import subprocess
import sys
import time

import pytest

from sqcached.bench.conn import WireClient

TESTS_DIR = os.path.dirname(os.path.abspath(__file__))
REPO_ROOT = os.path.dirname(TESTS_DIR)
CONFORMANCE_SCRIPT = os.path.join(REPO_ROOT, "conformance", "protocol_cases.txt")


class Daemon:
    """A daemon subprocess bound to an ephemeral TCP port (and optionally
    a unix socket); parses the READY line for the actual addresses."""

    def __init__(self, extra_args=(), env_extra=None, unix_path=None):
        args = [sys.executable, "-m", "sqcached", "--tcp", "127.0.0.1:0"]
        if unix_path:
            args += ["--unix", unix_path]
        args += list(extra_args)
        env = dict(os.environ)
        if env_extra:
            env.update(env_extra)
        self.proc = subprocess.Popen(
            args,
            stdout=subprocess.PIPE,
            stderr=subprocess.DEVNULL,
            env=env,
        )
        self.unix_path = unix_path
        line = self.proc.stdout.readline().decode()
        if not line.startswith("READY"):
            self.proc.kill()
            raise RuntimeError(f"daemon failed to start: {line!r}")
        self.host, self.port = None, None
        for part in line.split()[1:]:
            key, _, value = part.partition("=")
            if key == "tcp":
                host, _, port = value.rpartition(":")
                self.host, self.port = host, int(port)

    def connect(self):
        deadline = time.time() + 5
        while True:
            try:
                return WireClient.connect_tcp(self.host, self.port)
            except OSError:
                if time.time() > deadline:
                    raise
                time.sleep(0.01)

    def connect_unix(self):
        return WireClient.connect_unix(self.unix_path)

    def stop(self):
        if self.proc.poll() is None:
            self.proc.send_signal(signal.SIGTERM)
            try:
                self.proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self.proc.kill()
                self.proc.wait()
        self.proc.stdout.close()


@pytest.fixture
def daemon():
    d = Daemon()
    yield d
    d.stop()


@pytest.fixture
def client(daemon):
    c = daemon.connect()
    yield c
    c.close()


def kernel_backends():
    """All importable kernel modules, compiled first."""
    from sqcached import kernel_py

    mods = []
    try:
        from sqcached import _ckernel

        mods.append(pytest.param(_ckernel, id="compiled"))
    except ImportError:
        pass
    mods.append(pytest.param(kernel_py, id="python"))
    return mods
