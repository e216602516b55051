import functools
import warnings

import pytest

from kaclab.density1d import bump, gaussian
from kaclab.extension import get_extension
from kaclab.harness import verify_chain
from kaclab.sphere import SphereDensity


@functools.lru_cache(maxsize=None)
def bump_base():
    return bump()


@functools.lru_cache(maxsize=None)
def bump_F(N):
    return SphereDensity.conditioned_tensorization(bump_base(), N)


@functools.lru_cache(maxsize=None)
def gauss_F(N):
    return SphereDensity.conditioned_tensorization(gaussian(), N)


@functools.lru_cache(maxsize=None)
def uniform_F(N):
    return SphereDensity.uniform(N)


@functools.lru_cache(maxsize=None)
def chain(family, N):
    F = {"bump": bump_F, "gaussian": gauss_F, "uniform": uniform_F}[family](N)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return verify_chain(F)


def ext(F):
    return get_extension(F)


@pytest.fixture(scope="session")
def fam():
    return {"bump": bump_F, "gaussian": gauss_F, "uniform": uniform_F, "chain": chain, "ext": ext,
            "base": bump_base}


ACCEPTANCE_LINES = []


def record(tag, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] {tag}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("C", 1)[1].split(" ")[0])):
            terminalreporter.write_line(line)
