"""Suite-wide offline guarantee.

Every test runs with GOVAUDIT_MODE=replay and with sockets disabled.  A
connection attempt raises inside the test and is also remembered, so the
session fails even when library code swallows the exception.
"""

from __future__ import annotations

import os
import socket

import pytest

os.environ["GOVAUDIT_MODE"] = "replay"
os.environ.pop("GOVAUDIT_LLM_URL", None)

NETWORK_ATTEMPTS: list[str] = []
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


class NetworkBlocked(RuntimeError):
    pass


def _blocked(name):
    def guard(*args, **kwargs):
        NETWORK_ATTEMPTS.append(f"{name}{args[1:2] if name.endswith('connect') else args[:1]}")
        raise NetworkBlocked(f"network access attempted during tests: {name}")

    return guard


_ORIGINALS = {
    "connect": socket.socket.connect,
    "connect_ex": socket.socket.connect_ex,
    "create_connection": socket.create_connection,
    "getaddrinfo": socket.getaddrinfo,
}


def pytest_configure(config):
    socket.socket.connect = _blocked("socket.connect")
    socket.socket.connect_ex = _blocked("socket.connect_ex")
    socket.create_connection = _blocked("socket.create_connection")
    socket.getaddrinfo = _blocked("socket.getaddrinfo")


def pytest_unconfigure(config):
    socket.socket.connect = _ORIGINALS["connect"]
    socket.socket.connect_ex = _ORIGINALS["connect_ex"]
    socket.create_connection = _ORIGINALS["create_connection"]
    socket.getaddrinfo = _ORIGINALS["getaddrinfo"]


def pytest_sessionfinish(session, exitstatus):
    if NETWORK_ATTEMPTS:
        session.exitstatus = pytest.ExitCode.TESTS_FAILED


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if 10 in ACCEPTANCE:
        ok, detail = ACCEPTANCE[10]
        if NETWORK_ATTEMPTS or exitstatus != 0:
            ACCEPTANCE[10] = (False, f"{detail}; suite exit {int(exitstatus)}, {len(NETWORK_ATTEMPTS)} network attempts")
        else:
            ACCEPTANCE[10] = (ok, f"{detail}; whole suite green with no network attempts")
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            ok, detail = ACCEPTANCE[n]
            terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
    if NETWORK_ATTEMPTS:
        terminalreporter.section("network attempts (suite fails)")
        for a in NETWORK_ATTEMPTS:
            terminalreporter.write_line(a)
