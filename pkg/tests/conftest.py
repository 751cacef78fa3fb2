from __future__ import annotations

import pytest

_CRITERIA: dict[str, tuple[bool, str]] = {}


class _Recorder:
    def __init__(self, name: str) -> None:
        self.name = name
        self.detail = ""

    def __enter__(self) -> _Recorder:
        return self

    def __exit__(self, exc_type, exc, tb) -> bool:
        if exc_type is None:
            _CRITERIA[self.name] = (True, self.detail)
        else:
            _CRITERIA[self.name] = (False, f"{exc_type.__name__}: {exc}".splitlines()[0])
        line = f"criterion {self.name}: {'PASS' if exc_type is None else 'FAIL'}"
        print(line + (f" ({_CRITERIA[self.name][1]})" if _CRITERIA[self.name][1] else ""))
        return False


@pytest.fixture
def criterion():
    return _Recorder


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_CRITERIA, key=lambda n: (int(n.split()[0]), n)):
        ok, detail = _CRITERIA[name]
        terminalreporter.write_line(f"criterion {name}: {'PASS' if ok else 'FAIL'}" + (f" ({detail})" if detail else ""))
